#pragma once

// The measure-valued local functionals: quadrature evaluation of the E/F
// families (and the n=2 quarter-turn family), top-degree weighted
// Monge-Ampere densities, minor-basis polynomial densities, the exact
// discrete Monge-Ampere operator for max-affine functions, and the affine
// group action on evaluations.

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "maval/common.hpp"
#include "maval/convexfn.hpp"
#include "maval/linalg.hpp"
#include "maval/measure.hpp"

namespace maval {

// ---------------------------------------------------------------------------
// Polynomial weights
// ---------------------------------------------------------------------------

/// Monomial in (x; s, v): coeff * prod x_i^xpow_i * s^spow * prod v_i^vpow_i.
struct XsvTerm {
    double coeff = 0.0;
    std::array<int, 3> xpow{};
    int spow = 0;
    std::array<int, 3> vpow{};
};

struct XsvPolynomial {
    int dim = 1;
    std::vector<XsvTerm> terms;

    double operator()(const Vec& x, double s, const Vec& v) const {
        double acc = 0;
        for (const auto& t : terms) {
            double m = t.coeff;
            for (int i = 0; i < dim; ++i) {
                for (int k = 0; k < t.xpow[i]; ++k) m *= x[i];
                for (int k = 0; k < t.vpow[i]; ++k) m *= v[i];
            }
            for (int k = 0; k < t.spow; ++k) m *= s;
            acc += m;
        }
        return acc;
    }

    /// Degree in the affine argument (s, v).
    int degree_sv() const {
        int d = 0;
        for (const auto& t : terms) {
            int td = t.spow;
            for (int i = 0; i < dim; ++i) td += t.vpow[i];
            d = std::max(d, td);
        }
        return d;
    }
};

/// k-minor of a symmetric matrix, identified by row and column index sets.
/// Symmetric duplicates minor(R,C) = minor(C,R) are canonicalized to R <= C.
struct MinorSymbol {
    int k = 0;
    std::vector<int> rows, cols;

    static MinorSymbol canonical(std::vector<int> rows, std::vector<int> cols) {
        std::sort(rows.begin(), rows.end());
        std::sort(cols.begin(), cols.end());
        if (rows.size() != cols.size()) throw dimension_mismatch("minor row/col set sizes");
        MinorSymbol m;
        m.k = static_cast<int>(rows.size());
        if (cols < rows) std::swap(rows, cols);
        m.rows = std::move(rows);
        m.cols = std::move(cols);
        return m;
    }

    double eval(const SymMatrix& A) const {
        if (k == 0) return 1.0;
        return A.minor(rows, cols);
    }
};

struct MinorTerm {
    double coeff = 0.0;
    int spow = 0;
    std::array<int, 3> vpow{};
    MinorSymbol minor;
};

// ---------------------------------------------------------------------------
// FunctionalSpec
// ---------------------------------------------------------------------------

class FunctionalSpec;

namespace spec_body {
struct EFam {
    int a = 0, b = 0, c = 0;
};
struct FFam {
    int a = 0, b = 1, c = 1;
};
struct FTilde {
    int b = 0, j = 1;
};
struct TopDegree {
    XsvPolynomial psi;
};
struct PolyMinor {
    std::vector<MinorTerm> terms;
};
struct DiscreteMA {};
struct LinComb {
    std::vector<std::pair<double, FunctionalSpec>> terms;
};
struct Discontinuous1D {};
using Variant = std::variant<EFam, FFam, FTilde, TopDegree, PolyMinor, DiscreteMA, LinComb, Discontinuous1D>;
}  // namespace spec_body

class FunctionalSpec {
  public:
    static FunctionalSpec e_fam(int dim, int a, int b, int c) {
        check_dim(dim);
        if (a < 0 || b < 0 || c < 0 || c > dim) throw precondition_error("E family requires a,b >= 0, 0 <= c <= n");
        return make(dim, spec_body::EFam{a, b, c});
    }
    static FunctionalSpec f_fam(int dim, int a, int b, int c) {
        check_dim(dim);
        if (dim < 2) throw precondition_error("F family undefined for n = 1");
        if (a < 0 || b < 1 || c < 1 || c > dim - 1)
            throw precondition_error("F family requires a >= 0, b >= 1, 1 <= c <= n-1");
        return make(dim, spec_body::FFam{a, b, c});
    }
    static FunctionalSpec f_tilde(int dim, int b, int j) {
        if (dim != 2) throw precondition_error("the quarter-turn family exists only for n = 2");
        if (b < 0 || j < 1) throw precondition_error("f_tilde requires b >= 0, j >= 1");
        return make(2, spec_body::FTilde{b, j});
    }
    static FunctionalSpec top_degree(int dim, XsvPolynomial psi) {
        check_dim(dim);
        psi.dim = dim;
        return make(dim, spec_body::TopDegree{std::move(psi)});
    }
    static FunctionalSpec poly_minor(int dim, std::vector<MinorTerm> terms) {
        check_dim(dim);
        for (const auto& t : terms) {
            if (t.minor.k > dim) throw precondition_error("minor order exceeds dimension");
            for (int r : t.minor.rows)
                if (r < 0 || r >= dim) throw precondition_error("minor row index out of range");
            for (int c : t.minor.cols)
                if (c < 0 || c >= dim) throw precondition_error("minor column index out of range");
        }
        return make(dim, spec_body::PolyMinor{std::move(terms)});
    }
    static FunctionalSpec discrete_ma(int dim) {
        check_dim(dim);
        return make(dim, spec_body::DiscreteMA{});
    }
    static FunctionalSpec lin_comb(std::vector<std::pair<double, FunctionalSpec>> terms) {
        if (terms.empty()) throw precondition_error("lin_comb needs at least one term");
        int n = terms.front().second.dim();
        for (const auto& [c, t] : terms)
            if (t.dim() != n) throw dimension_mismatch("lin_comb terms must share dimension");
        return make(n, spec_body::LinComb{std::move(terms)});
    }
    static FunctionalSpec discontinuous_1d() { return make(1, spec_body::Discontinuous1D{}); }

    int dim() const { return dim_; }
    const spec_body::Variant& body() const { return *v_; }

    /// True when quadrature evaluation needs a C^2 function.
    bool requires_c2() const {
        return std::visit(
            [](const auto& b) -> bool {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, spec_body::DiscreteMA> ||
                              std::is_same_v<T, spec_body::Discontinuous1D>)
                    return false;
                else if constexpr (std::is_same_v<T, spec_body::LinComb>) {
                    for (const auto& [c, t] : b.terms)
                        if (t.requires_c2()) return true;
                    return false;
                } else
                    return true;
            },
            *v_);
    }

    /// Upper bound for the polynomial degree in the affine argument.
    int degree_bound() const {
        return std::visit(
            [&](const auto& b) -> int {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, spec_body::EFam>) return b.a + 2 * b.b;
                else if constexpr (std::is_same_v<T, spec_body::FFam>) return b.a + 2 * b.b;
                else if constexpr (std::is_same_v<T, spec_body::FTilde>) return b.b + 2 * b.j;
                else if constexpr (std::is_same_v<T, spec_body::TopDegree>) return b.psi.degree_sv();
                else if constexpr (std::is_same_v<T, spec_body::PolyMinor>) {
                    int d = 0;
                    for (const auto& t : b.terms) {
                        int td = t.spow;
                        for (int i = 0; i < dim_; ++i) td += t.vpow[i];
                        d = std::max(d, td);
                    }
                    return d;
                } else if constexpr (std::is_same_v<T, spec_body::LinComb>) {
                    int d = 0;
                    for (const auto& [c, t] : b.terms) d = std::max(d, t.degree_bound());
                    return d;
                } else
                    return 0;
            },
            *v_);
    }

    /// Homogeneity degree when the functional is homogeneous.
    std::optional<int> homogeneity() const {
        return std::visit(
            [&](const auto& b) -> std::optional<int> {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, spec_body::EFam>) return b.a + 2 * b.b + b.c;
                else if constexpr (std::is_same_v<T, spec_body::FFam>) return b.a + 2 * b.b + b.c;
                else if constexpr (std::is_same_v<T, spec_body::FTilde>) return b.b + 2 * b.j + 1;
                else if constexpr (std::is_same_v<T, spec_body::DiscreteMA>) return dim_;
                else if constexpr (std::is_same_v<T, spec_body::Discontinuous1D>) return 0;
                else if constexpr (std::is_same_v<T, spec_body::LinComb>) {
                    std::optional<int> k;
                    for (const auto& [c, t] : b.terms) {
                        auto tk = t.homogeneity();
                        if (!tk) return std::nullopt;
                        if (k && *k != *tk) return std::nullopt;
                        k = tk;
                    }
                    return k;
                } else
                    return std::nullopt;
            },
            *v_);
    }

    /// Density integrand at x, from the 2-jet of f. Only meaningful for the
    /// quadrature-backed variants.
    double density_value(const ConvexFunction& f, const Vec& x) const;

  private:
    static void check_dim(int n) {
        if (n < 1 || n > kMaxDim) throw dimension_mismatch("dimension must be 1, 2 or 3");
    }
    static FunctionalSpec make(int dim, spec_body::Variant v) {
        FunctionalSpec s;
        s.dim_ = dim;
        s.v_ = std::make_shared<const spec_body::Variant>(std::move(v));
        return s;
    }
    int dim_ = 1;
    std::shared_ptr<const spec_body::Variant> v_;
};

inline double FunctionalSpec::density_value(const ConvexFunction& f, const Vec& x) const {
    int n = dim_;
    return std::visit(
        [&](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, spec_body::EFam>) {
                double out = 1.0;
                if (b.a > 0) {
                    double fv = f.evaluate(x);
                    for (int k = 0; k < b.a; ++k) out *= fv;
                }
                if (b.b > 0) {
                    double g2 = norm2(f.gradient(x));
                    for (int k = 0; k < b.b; ++k) out *= g2;
                }
                if (b.c > 0)
                    out *= mixed_discriminant_with_multiplicity(f.hessian(x), b.c, std::nullopt, n);
                return out;
            } else if constexpr (std::is_same_v<T, spec_body::FFam>) {
                Vec g = f.gradient(x);
                double out = 1.0;
                if (b.a > 0) {
                    double fv = f.evaluate(x);
                    for (int k = 0; k < b.a; ++k) out *= fv;
                }
                double g2 = norm2(g);
                for (int k = 0; k < b.b - 1; ++k) out *= g2;
                out *= mixed_discriminant_with_multiplicity(f.hessian(x), b.c, SymMatrix::outer(g), n);
                return out;
            } else if constexpr (std::is_same_v<T, spec_body::FTilde>) {
                Vec g = f.gradient(x);
                Vec ig(2);
                ig[0] = -g[1];  // counterclockwise quarter turn
                ig[1] = g[0];
                double out = 1.0;
                if (b.b > 0) {
                    double fv = f.evaluate(x);
                    for (int k = 0; k < b.b; ++k) out *= fv;
                }
                double g2 = norm2(g);
                for (int k = 0; k < b.j - 1; ++k) out *= g2;
                out *= mixed_discriminant_with_multiplicity(f.hessian(x), 1, SymMatrix::outer(ig), 2);
                return out;
            } else if constexpr (std::is_same_v<T, spec_body::TopDegree>) {
                return b.psi(x, f.evaluate(x), f.gradient(x)) * f.hessian(x).det();
            } else if constexpr (std::is_same_v<T, spec_body::PolyMinor>) {
                double s = f.evaluate(x);
                Vec g = f.gradient(x);
                SymMatrix H = f.hessian(x);
                double acc = 0;
                for (const auto& t : b.terms) {
                    double m = t.coeff;
                    for (int k = 0; k < t.spow; ++k) m *= s;
                    for (int i = 0; i < n; ++i)
                        for (int k = 0; k < t.vpow[i]; ++k) m *= g[i];
                    acc += m * t.minor.eval(H);
                }
                return acc;
            } else if constexpr (std::is_same_v<T, spec_body::LinComb>) {
                double acc = 0;
                for (const auto& [c, t] : b.terms) acc += c * t.density_value(f, x);
                return acc;
            } else {
                throw wrong_representation("functional has no density integrand");
            }
        },
        *v_);
}

// ---------------------------------------------------------------------------
// Discrete Monge-Ampere for max-affine functions
// ---------------------------------------------------------------------------

namespace detail {

inline double hull_volume_1d(const std::vector<Vec>& pts) {
    double lo = pts[0][0], hi = pts[0][0];
    for (const auto& p : pts) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
    }
    return hi - lo;
}

/// Convex hull area via monotone chain + shoelace.
inline double hull_volume_2d(std::vector<Vec> pts) {
    if (pts.size() < 3) return 0.0;
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    std::size_t lower = k + 1;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
        hull[k++] = *it;
    }
    hull.resize(k > 0 ? k - 1 : 0);
    double area = 0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec& a = hull[i];
        const Vec& b = hull[(i + 1) % hull.size()];
        area += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(area);
}

/// Convex hull volume in 3D: incremental hull with visible-face repair,
/// volume by a fan of tetrahedra from the centroid.
inline double hull_volume_3d(const std::vector<Vec>& pts) {
    const std::size_t n = pts.size();
    if (n < 4) return 0.0;
    auto sub = [](const Vec& a, const Vec& b) { return a - b; };
    auto cross3 = [](const Vec& a, const Vec& b) {
        Vec c(3);
        c[0] = a[1] * b[2] - a[2] * b[1];
        c[1] = a[2] * b[0] - a[0] * b[2];
        c[2] = a[0] * b[1] - a[1] * b[0];
        return c;
    };
    double scale = 1e-12;
    for (const auto& p : pts) scale = std::max({scale, std::abs(p[0]), std::abs(p[1]), std::abs(p[2])});
    const double eps = 1e-9 * scale * scale * scale;

    // seed tetrahedron
    std::array<std::size_t, 4> seed{0, 0, 0, 0};
    bool found = false;
    for (std::size_t a = 0; a < n && !found; ++a)
        for (std::size_t b = a + 1; b < n && !found; ++b)
            for (std::size_t c = b + 1; c < n && !found; ++c)
                for (std::size_t d = c + 1; d < n && !found; ++d) {
                    double vol = dot(cross3(sub(pts[b], pts[a]), sub(pts[c], pts[a])), sub(pts[d], pts[a]));
                    if (std::abs(vol) > eps) {
                        seed = {a, b, c, d};
                        found = true;
                    }
                }
    if (!found) return 0.0;  // coplanar set

    struct Face {
        std::array<std::size_t, 3> v;
        bool alive = true;
    };
    std::vector<Face> faces;
    Vec inner(3);
    for (auto i : seed) inner += 0.25 * pts[i];
    auto add_face = [&](std::size_t a, std::size_t b, std::size_t c) {
        Vec nrm = cross3(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
        if (dot(nrm, sub(inner, pts[a])) > 0) std::swap(b, c);  // outward orientation
        faces.push_back({{a, b, c}, true});
    };
    add_face(seed[0], seed[1], seed[2]);
    add_face(seed[0], seed[1], seed[3]);
    add_face(seed[0], seed[2], seed[3]);
    add_face(seed[1], seed[2], seed[3]);

    for (std::size_t p = 0; p < n; ++p) {
        bool in_seed = false;
        for (auto s : seed) in_seed |= (s == p);
        if (in_seed) continue;
        // faces visible from pts[p]; their once-counted edges form the horizon
        std::map<std::pair<std::size_t, std::size_t>, int> edge_count;
        bool any_visible = false;
        for (auto& f : faces) {
            if (!f.alive) continue;
            Vec nrm = cross3(sub(pts[f.v[1]], pts[f.v[0]]), sub(pts[f.v[2]], pts[f.v[0]]));
            if (dot(nrm, sub(pts[p], pts[f.v[0]])) > eps) {
                f.alive = false;
                any_visible = true;
                for (int e = 0; e < 3; ++e) {
                    auto a = f.v[e], b = f.v[(e + 1) % 3];
                    edge_count[{std::min(a, b), std::max(a, b)}]++;
                }
            }
        }
        if (!any_visible) continue;
        faces.erase(std::remove_if(faces.begin(), faces.end(), [](const Face& f) { return !f.alive; }),
                    faces.end());
        for (const auto& [edge, cnt] : edge_count)
            if (cnt == 1) add_face(edge.first, edge.second, p);
    }

    Vec centroid(3);
    double cnt = 0;
    for (const auto& f : faces)
        for (auto i : f.v) {
            centroid += (1.0) * pts[i];
            cnt += 1;
        }
    centroid *= 1.0 / cnt;
    double vol = 0;
    for (const auto& f : faces) {
        Vec a = sub(pts[f.v[0]], centroid), b = sub(pts[f.v[1]], centroid), c = sub(pts[f.v[2]], centroid);
        vol += std::abs(dot(cross3(a, b), c)) / 6.0;
    }
    return vol;
}

inline double hull_volume(int n, const std::vector<Vec>& pts) {
    if (pts.empty()) return 0.0;
    switch (n) {
        case 1:
            return hull_volume_1d(pts);
        case 2:
            return hull_volume_2d(pts);
        default:
            return hull_volume_3d(pts);
    }
}

/// Fold nonnegative scalings and affine pullbacks of a max-affine tree into
/// a flat piece list; nullopt when the tree is not max-affine representable.
inline std::optional<std::vector<AffinePiece>> fold_max_affine(const ConvexFunction& f) {
    if (const auto* ma = f.as_max_affine()) return ma->pieces;
    if (const auto* sc = std::get_if<body::Scale>(&f.body_variant())) {
        if (sc->t == 0.0) return std::vector<AffinePiece>{AffinePiece{Vec(f.dim()), 0.0}};
        auto inner = fold_max_affine(*sc->inner);
        if (!inner) return std::nullopt;
        for (auto& p : *inner) {
            p.v *= sc->t;
            p.b *= sc->t;
        }
        return inner;
    }
    if (const auto* pb = std::get_if<body::Pullback>(&f.body_variant())) {
        auto inner = fold_max_affine(*pb->inner);
        if (!inner) return std::nullopt;
        // <v, Mx + w> + b = <M^T v, x> + (<v, w> + b)
        for (auto& p : *inner) {
            double nb = dot(p.v, pb->g.offset()) + p.b;
            p.v = pb->g.apply_transpose(p.v);
            p.b = nb;
        }
        return inner;
    }
    return std::nullopt;
}

}  // namespace detail

/// Exact Monge-Ampere measure of a max-affine function restricted to B:
/// atoms at the vertices of the induced polyhedral subdivision, with masses
/// the volumes of the local gradient hulls. Accepts scalings and affine
/// pullbacks of max-affine trees by folding them into the pieces.
inline RadonMeasure discrete_ma(const ConvexFunction& f, const Region& B) {
    auto folded = detail::fold_max_affine(f);
    if (!folded) throw wrong_representation("discrete_ma requires a max-affine function");
    int n = f.dim();
    if (B.dim() != n) throw dimension_mismatch("region dimension");
    const auto& pieces = *folded;
    const int P = static_cast<int>(pieces.size());
    for (int i = 0; i < P; ++i)
        for (int j = i + 1; j < P; ++j) {
            bool same = pieces[i].b == pieces[j].b;
            for (int k = 0; k < n && same; ++k) same = pieces[i].v[k] == pieces[j].v[k];
            if (same) throw degenerate_subdivision("coincident max-affine pieces");
        }

    RadonMeasure out = RadonMeasure::zero(n);
    if (P <= n) return out;  // subdivision has no vertices

    std::vector<Vec> candidates;
    auto solve_tie = [&](const std::vector<int>& idx) -> std::optional<Vec> {
        // pieces idx[0..n] simultaneously equal: n linear equations
        std::vector<double> A(n * n);
        Vec rhs(n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) A[r * n + c] = pieces[idx[0]].v[c] - pieces[idx[r + 1]].v[c];
            rhs[r] = pieces[idx[r + 1]].b - pieces[idx[0]].b;
        }
        // solve by Gaussian elimination with partial pivoting
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
            if (std::abs(A[piv * n + col]) < 1e-10) return std::nullopt;
            if (piv != col) {
                for (int c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
                std::swap(rhs[piv], rhs[col]);
            }
            for (int r = col + 1; r < n; ++r) {
                double m = A[r * n + col] / A[col * n + col];
                for (int c = col; c < n; ++c) A[r * n + c] -= m * A[col * n + c];
                rhs[r] -= m * rhs[col];
            }
        }
        Vec x(n);
        for (int r = n - 1; r >= 0; --r) {
            double s = rhs[r];
            for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
            x[r] = s / A[r * n + r];
        }
        return x;
    };

    std::vector<int> idx(n + 1);
    std::function<void(int, int)> enumerate = [&](int start, int depth) {
        if (depth == n + 1) {
            if (auto x = solve_tie(idx)) candidates.push_back(*x);
            return;
        }
        for (int i = start; i < P; ++i) {
            idx[depth] = i;
            enumerate(i + 1, depth + 1);
        }
    };
    enumerate(0, 0);

    // deduplicate and keep subdivision vertices inside B
    std::map<std::array<long long, 3>, bool> seen;
    for (const auto& x : candidates) {
        std::array<long long, 3> key{0, 0, 0};
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            double q = x[i] * 1e7;
            if (!std::isfinite(q) || std::abs(q) > 9e17) ok = false;
            else key[i] = std::llround(q);
        }
        if (!ok || seen.count(key)) continue;
        seen[key] = true;
        if (!B.contains_atom(x)) continue;
        // active pieces at x
        double top = -std::numeric_limits<double>::infinity();
        std::vector<double> vals(P);
        for (int i = 0; i < P; ++i) {
            vals[i] = dot(pieces[i].v, x) + pieces[i].b;
            top = std::max(top, vals[i]);
        }
        double tol = 1e-8 * (1.0 + std::abs(top));
        std::vector<Vec> grads;
        for (int i = 0; i < P; ++i)
            if (top - vals[i] <= tol) grads.push_back(pieces[i].v);
        double mass = detail::hull_volume(n, grads);
        if (mass > 1e-12) out.add_atom(x, mass);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

inline RadonMeasure evaluate(const FunctionalSpec& spec, const ConvexFunction& f, const Region& B, int order);

namespace detail {

inline void accumulate(RadonMeasure& acc, const RadonMeasure& term, double coeff) {
    for (const auto& a : term.atoms) acc.add_atom(a.x, coeff * a.mass);
    if (term.density) {
        if (!acc.density) {
            acc.density = term.density;
            for (auto& v : acc.density->values) v *= coeff;
        } else {
            if (acc.density->values.size() != term.density->values.size())
                throw error("lin_comb terms produced incompatible grids");
            for (std::size_t i = 0; i < acc.density->values.size(); ++i)
                acc.density->values[i] += coeff * term.density->values[i];
        }
    }
}

}  // namespace detail

/// Evaluate the functional on f restricted to B. Quadrature-backed variants
/// return a density on make_grid(B, order); the discrete variants return
/// purely atomic measures.
inline RadonMeasure evaluate(const FunctionalSpec& spec, const ConvexFunction& f, const Region& B, int order) {
    if (spec.dim() != f.dim() || spec.dim() != B.dim())
        throw dimension_mismatch("functional/function/region dimensions");
    const auto& v = spec.body();
    if (std::holds_alternative<spec_body::DiscreteMA>(v)) return discrete_ma(f, B);
    if (std::holds_alternative<spec_body::Discontinuous1D>(v)) {
        RadonMeasure out = RadonMeasure::zero(1);
        auto [lo, hi] = f.subdifferential_1d(0.0);
        Vec origin{0.0};
        if (hi - lo > 1e-9 && B.contains_atom(origin)) out.add_atom(origin, 1.0);
        return out;
    }
    if (const auto* lc = std::get_if<spec_body::LinComb>(&v)) {
        RadonMeasure out = RadonMeasure::zero(spec.dim());
        for (const auto& [c, t] : lc->terms) detail::accumulate(out, evaluate(t, f, B, order), c);
        return out;
    }
    if (!f.is_c2()) throw not_c2("functional requires a C^2 function");
    RadonMeasure out = RadonMeasure::zero(spec.dim());
    RadonMeasure::Density d;
    d.grid = make_grid(B, order);
    d.values.assign(d.grid.size(), 0.0);
    d.order = order;
    d.standard = true;
    parallel_for(d.grid.size(), [&](std::size_t i) { d.values[i] = spec.density_value(f, d.grid.nodes[i]); });
    out.density = std::move(d);
    return out;
}

inline double total_mass(const FunctionalSpec& spec, const ConvexFunction& f, const Region& B, int order) {
    return evaluate(spec, f, B, order).total_mass();
}

// ---------------------------------------------------------------------------
// Group action on evaluations
// ---------------------------------------------------------------------------

/// g^{-1}(B) for region kinds representable in our Region type: any affine
/// map against translations, diagonal maps against boxes, conformal maps
/// (rotations, uniform scalings) against balls.
inline Region preimage_region(const AffineMap& g, const Region& B) {
    if (g.dim() != B.dim()) throw dimension_mismatch("map/region dimension");
    AffineMap inv = g.inverse();
    if (B.is_box()) {
        if (g.is_translation() || g.is_diagonal()) {
            Vec a = inv.apply(B.lo());
            Vec b = inv.apply(B.hi());
            Vec lo(B.dim()), hi(B.dim());
            for (int i = 0; i < B.dim(); ++i) {
                lo[i] = std::min(a[i], b[i]);
                hi[i] = std::max(a[i], b[i]);
            }
            return Region::box(lo, hi);
        }
        throw precondition_error("box preimage supported only for translations and diagonal maps");
    }
    if (auto s = g.conformal_scale()) return Region::ball(inv.apply(B.center()), B.radius() / *s);
    throw precondition_error("ball preimage supported only for conformal maps");
}

/// [pi(g) Psi](f; B): evaluate on f o g over g^{-1}(B), then push the result
/// forward through g (atoms move, density weights pick up |det g| and values
/// the reciprocal, so pairings transform consistently).
inline RadonMeasure pushforward_evaluate(const FunctionalSpec& spec, const AffineMap& g,
                                         const ConvexFunction& f, const Region& B, int order) {
    ConvexFunction fg = ConvexFunction::pullback(g, f);
    Region Bpre = preimage_region(g, B);
    RadonMeasure mu = evaluate(spec, fg, Bpre, order);
    RadonMeasure out = RadonMeasure::zero(spec.dim());
    for (const auto& a : mu.atoms) out.add_atom(g.apply(a.x), a.mass);
    if (mu.density) {
        double jac = std::abs(g.det());
        RadonMeasure::Density d;
        d.grid.region = B;
        d.grid.nodes.reserve(mu.density->grid.size());
        d.grid.weights.reserve(mu.density->grid.size());
        for (std::size_t i = 0; i < mu.density->grid.size(); ++i) {
            d.grid.nodes.push_back(g.apply(mu.density->grid.nodes[i]));
            d.grid.weights.push_back(mu.density->grid.weights[i] * jac);
        }
        d.values.reserve(mu.density->values.size());
        for (double v : mu.density->values) d.values.push_back(v / jac);
        out.density = std::move(d);
    }
    return out;
}

}  // namespace maval
