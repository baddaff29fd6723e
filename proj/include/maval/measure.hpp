#pragma once

// The measure side of the library: bounded regions (boxes and balls), C^2
// bump test functions, quadrature grids, and hybrid atom+density signed
// Radon measures with pairing and total variation.

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "maval/common.hpp"
#include "maval/linalg.hpp"

namespace maval {

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

class Region {
  public:
    static Region box(const Vec& lo, const Vec& hi) {
        lo.require_same_dim(hi);
        for (int i = 0; i < lo.dim(); ++i)
            if (!(lo[i] < hi[i])) throw precondition_error("box requires lo < hi componentwise");
        Region r;
        r.is_box_ = true;
        r.lo_ = lo;
        r.hi_ = hi;
        return r;
    }
    static Region ball(const Vec& center, double radius) {
        if (!(radius > 0) || !std::isfinite(radius)) throw precondition_error("ball radius must be positive");
        Region r;
        r.is_box_ = false;
        r.center_ = center;
        r.radius_ = radius;
        return r;
    }

    bool is_box() const { return is_box_; }
    int dim() const { return is_box_ ? lo_.dim() : center_.dim(); }
    const Vec& lo() const { return lo_; }
    const Vec& hi() const { return hi_; }
    const Vec& center() const { return center_; }
    double radius() const { return radius_; }

    double volume() const {
        if (is_box_) {
            double v = 1;
            for (int i = 0; i < dim(); ++i) v *= hi_[i] - lo_[i];
            return v;
        }
        switch (dim()) {
            case 1:
                return 2 * radius_;
            case 2:
                return std::numbers::pi * radius_ * radius_;
            default:
                return 4.0 / 3.0 * std::numbers::pi * radius_ * radius_ * radius_;
        }
    }

    /// Atom membership. Tie rule: boxes are closed on the lower-left
    /// boundary and open on the upper-right; balls are closed.
    bool contains_atom(const Vec& x) const {
        if (x.dim() != dim()) throw dimension_mismatch("region/point dimension");
        if (is_box_) {
            for (int i = 0; i < dim(); ++i)
                if (x[i] < lo_[i] || x[i] >= hi_[i]) return false;
            return true;
        }
        return norm(x - center_) <= radius_;
    }

    /// Euclidean distance from x to the region (0 inside).
    double distance(const Vec& x) const {
        if (x.dim() != dim()) throw dimension_mismatch("region/point dimension");
        if (is_box_) {
            double d2 = 0;
            for (int i = 0; i < dim(); ++i) {
                double d = std::max({0.0, lo_[i] - x[i], x[i] - hi_[i]});
                d2 += d * d;
            }
            return std::sqrt(d2);
        }
        return std::max(0.0, norm(x - center_) - radius_);
    }

    /// Axis-aligned bounding box corners.
    std::pair<Vec, Vec> bounds() const {
        if (is_box_) return {lo_, hi_};
        Vec lo = center_, hi = center_;
        for (int i = 0; i < dim(); ++i) {
            lo[i] -= radius_;
            hi[i] += radius_;
        }
        return {lo, hi};
    }

  private:
    bool is_box_ = true;
    Vec lo_{0.0}, hi_{1.0};
    Vec center_{0.0};
    double radius_ = 1.0;
};

// ---------------------------------------------------------------------------
// Test functions: phi(x) = amplitude * (1 - |x-center|^2/r^2)^p on B_r(center)
// ---------------------------------------------------------------------------

struct TestFunction {
    Vec center;
    double radius = 1.0;
    int power = 3;  // p >= 3 keeps two continuous derivatives at the boundary
    double amplitude = 1.0;

    TestFunction() = default;
    TestFunction(Vec c, double r, int p, double a) : center(c), radius(r), power(p), amplitude(a) {
        if (!(r > 0)) throw precondition_error("test function radius must be positive");
        if (p < 3) throw precondition_error("test function power must be >= 3");
    }

    int dim() const { return center.dim(); }

    double operator()(const Vec& x) const {
        if (x.dim() != dim()) throw dimension_mismatch("test function argument");
        double u = norm2(x - center) / (radius * radius);
        if (u >= 1.0) return 0.0;
        return amplitude * std::pow(1.0 - u, power);
    }

    Vec gradient_at(const Vec& x) const {
        Vec g(dim());
        double r2 = radius * radius;
        double u = norm2(x - center) / r2;
        if (u >= 1.0) return g;
        double s = -amplitude * power * std::pow(1.0 - u, power - 1) * 2.0 / r2;
        for (int i = 0; i < dim(); ++i) g[i] = s * (x[i] - center[i]);
        return g;
    }

    SymMatrix hessian_at(const Vec& x) const {
        SymMatrix h(dim());
        double r2 = radius * radius;
        double u = norm2(x - center) / r2;
        if (u >= 1.0) return h;
        double a = -amplitude * power * std::pow(1.0 - u, power - 1) * 2.0 / r2;
        double b = amplitude * power * (power - 1) * std::pow(1.0 - u, power - 2) * 4.0 / (r2 * r2);
        for (int i = 0; i < dim(); ++i) {
            for (int j = i; j < dim(); ++j) {
                double v = b * (x[i] - center[i]) * (x[j] - center[j]);
                if (i == j) v += a;
                h.at(i, j) = v;
            }
        }
        return h;
    }

    /// Analytic upper bound for sup_x ||D^2 phi||_2.
    double hessian_norm_bound() const {
        double p = power;
        return std::abs(amplitude) * (2 * p + 4 * p * (p - 1)) / (radius * radius);
    }

    Region support() const { return Region::ball(center, radius); }
};

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes and quadrature grids
// ---------------------------------------------------------------------------

/// Nodes/weights on [-1,1], Newton iteration on Legendre polynomials.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    std::vector<double> x(order), w(order);
    for (int i = 0; i < order; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = order * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= order; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = order * (t * p1 - p0) / (t * t - 1.0);
        x[order - 1 - i] = t;
        w[order - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first->second;
}

struct QuadratureGrid {
    Region region = Region::box(Vec{0.0}, Vec{1.0});
    std::vector<Vec> nodes;
    std::vector<double> weights;

    int dim() const { return region.dim(); }
    std::size_t size() const { return nodes.size(); }
};

namespace detail {

// 1D panel [a,b] scaled from the reference GL rule.
inline void append_panel_1d(std::vector<double>& xs, std::vector<double>& ws, double a, double b, int order) {
    const auto& [gx, gw] = gauss_legendre(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
        xs.push_back(mid + half * gx[i]);
        ws.push_back(half * gw[i]);
    }
}

// Radial panels on [0,r]: inner panels at the given order, outermost shell
// refined at twice the order to absorb integrand growth near the boundary.
inline void radial_panels(double r, int order, std::vector<double>& xs, std::vector<double>& ws) {
    append_panel_1d(xs, ws, 0.0, 0.55 * r, order);
    append_panel_1d(xs, ws, 0.55 * r, 0.85 * r, order);
    append_panel_1d(xs, ws, 0.85 * r, r, std::min(2 * order, 128));
}

}  // namespace detail

/// Tensor-product Gauss-Legendre for boxes; for balls a radial subdivision
/// in polar/spherical coordinates (exact total weight, all nodes interior).
inline QuadratureGrid make_grid(const Region& region, int order) {
    if (order < 2 || order > 64) throw precondition_error("quadrature order must be in [2, 64]");
    QuadratureGrid g;
    g.region = region;
    int n = region.dim();
    if (region.is_box()) {
        std::vector<std::vector<double>> xs(n), ws(n);
        for (int i = 0; i < n; ++i)
            detail::append_panel_1d(xs[i], ws[i], region.lo()[i], region.hi()[i], order);
        std::array<int, 3> idx{0, 0, 0};
        std::size_t total = 1;
        for (int i = 0; i < n; ++i) total *= xs[i].size();
        g.nodes.reserve(total);
        g.weights.reserve(total);
        for (std::size_t k = 0; k < total; ++k) {
            std::size_t rem = k;
            Vec p(n);
            double w = 1;
            for (int i = 0; i < n; ++i) {
                idx[i] = static_cast<int>(rem % xs[i].size());
                rem /= xs[i].size();
                p[i] = xs[i][idx[i]];
                w *= ws[i][idx[i]];
            }
            g.nodes.push_back(p);
            g.weights.push_back(w);
        }
        return g;
    }
    const Vec& c = region.center();
    double r = region.radius();
    if (n == 1) {
        std::vector<double> xs, ws;
        detail::append_panel_1d(xs, ws, c[0] - r, c[0] + r, order);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            g.nodes.push_back(Vec{xs[i]});
            g.weights.push_back(ws[i]);
        }
        return g;
    }
    std::vector<double> rx, rw;
    detail::radial_panels(r, order, rx, rw);
    if (n == 2) {
        int ntheta = 4 * order;
        double wtheta = 2 * std::numbers::pi / ntheta;
        for (std::size_t i = 0; i < rx.size(); ++i) {
            for (int j = 0; j < ntheta; ++j) {
                double th = (j + 0.5) * 2 * std::numbers::pi / ntheta;
                Vec p(2);
                p[0] = c[0] + rx[i] * std::cos(th);
                p[1] = c[1] + rx[i] * std::sin(th);
                g.nodes.push_back(p);
                g.weights.push_back(rw[i] * rx[i] * wtheta);
            }
        }
        return g;
    }
    // n == 3: substitute u = cos(polar angle) so the weight is polynomial.
    const auto& [ux, uw] = gauss_legendre(order);
    int ntheta = 2 * order;
    double wtheta = 2 * std::numbers::pi / ntheta;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        for (int a = 0; a < order; ++a) {
            double u = ux[a];
            double s = std::sqrt(std::max(0.0, 1.0 - u * u));
            for (int j = 0; j < ntheta; ++j) {
                double th = (j + 0.5) * 2 * std::numbers::pi / ntheta;
                Vec p(3);
                p[0] = c[0] + rx[i] * s * std::cos(th);
                p[1] = c[1] + rx[i] * s * std::sin(th);
                p[2] = c[2] + rx[i] * u;
                g.nodes.push_back(p);
                g.weights.push_back(rw[i] * rx[i] * rx[i] * uw[a] * wtheta);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Radon measures: finite atoms plus an optional density on a grid
// ---------------------------------------------------------------------------

struct RadonMeasure {
    struct Atom {
        Vec x;
        double mass = 0.0;
    };
    struct Density {
        QuadratureGrid grid;
        std::vector<double> values;
        int order = 0;           // make_grid order when the grid is standard
        bool standard = false;   // true iff grid == make_grid(grid.region, order)
    };

    int dim = 1;
    std::vector<Atom> atoms;
    std::optional<Density> density;

    static RadonMeasure zero(int n) {
        RadonMeasure m;
        m.dim = n;
        return m;
    }

    void add_atom(const Vec& x, double mass) {
        if (x.dim() != dim) throw dimension_mismatch("atom dimension");
        atoms.push_back({x, mass});
    }

    void scale(double t) {
        for (auto& a : atoms) a.mass *= t;
        if (density)
            for (auto& v : density->values) v *= t;
    }

    /// Total mass: sum of atom masses plus the density integral.
    double total_mass() const {
        double s = 0;
        for (const auto& a : atoms) s += a.mass;
        if (density)
            for (std::size_t i = 0; i < density->values.size(); ++i)
                s += density->grid.weights[i] * density->values[i];
        return s;
    }
};

/// <mu, phi> = sum over atoms of mass * phi + density-weighted sum.
inline double pair(const RadonMeasure& mu, const TestFunction& phi) {
    if (mu.dim != phi.dim()) throw dimension_mismatch("measure/test function dimension");
    double s = 0;
    for (const auto& a : mu.atoms) s += a.mass * phi(a.x);
    if (mu.density) {
        const auto& d = *mu.density;
        for (std::size_t i = 0; i < d.values.size(); ++i)
            s += d.grid.weights[i] * d.values[i] * phi(d.grid.nodes[i]);
    }
    return s;
}

/// Representation-level total variation restricted to A: exact on atoms,
/// quadrature-accurate on densities.
inline double total_variation(const RadonMeasure& mu, const Region& A) {
    if (mu.dim != A.dim()) throw dimension_mismatch("measure/region dimension");
    double s = 0;
    for (const auto& a : mu.atoms)
        if (A.contains_atom(a.x)) s += std::abs(a.mass);
    if (mu.density) {
        const auto& d = *mu.density;
        for (std::size_t i = 0; i < d.values.size(); ++i)
            if (A.contains_atom(d.grid.nodes[i])) s += d.grid.weights[i] * std::abs(d.values[i]);
    }
    return s;
}

}  // namespace maval
