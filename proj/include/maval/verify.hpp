#pragma once

// Theorem-level verification: the valuation identity over certified pairs,
// rigid-motion invariance trials, sampling-rank linear independence of the
// invariant basis, and the semi-norm estimator. Suites are falsification
// attempts with fixed seeds; they can only refute, never prove.

#include <sstream>
#include <string>
#include <vector>

#include "maval/decompose.hpp"
#include "maval/functionals.hpp"

namespace maval {

struct TrialResult {
    std::string inputs_hash;
    double residual = 0.0;
    bool pass = true;
    bool skipped = false;
    std::string note;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<TrialResult> trials;
    bool pass = true;

    void add(TrialResult t) {
        if (!t.skipped) pass = pass && t.pass;
        trials.push_back(std::move(t));
    }
};

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

inline ConvexFunction random_c2(Rng& rng, int n) {
    SymMatrix A(n);
    for (int r = 0; r < n; ++r) {
        Vec g = rng.uniform_vec(n, -1.0, 1.0);
        A += SymMatrix::outer(g);
    }
    for (int i = 0; i < n; ++i) A.at(i, i) += 0.3;
    auto quad = ConvexFunction::quadratic(A, rng.uniform_vec(n, -1.0, 1.0), rng.uniform(-1.0, 1.0));
    std::vector<AffinePiece> pieces;
    int m = rng.uniform_int(2, 4);
    for (int i = 0; i < m; ++i)
        pieces.push_back({rng.uniform_vec(n, -1.0, 1.0), rng.uniform(-0.5, 0.5)});
    auto lse = ConvexFunction::log_sum_exp(std::move(pieces), rng.uniform(2.0, 5.0));
    return ConvexFunction::sum(quad, ConvexFunction::scale(rng.uniform(0.2, 1.0), lse));
}

inline ConvexFunction random_max_affine(Rng& rng, int n, int min_pieces = 3, int max_pieces = 6) {
    std::vector<AffinePiece> pieces;
    int m = rng.uniform_int(min_pieces, max_pieces);
    for (int i = 0; i < m; ++i)
        pieces.push_back({rng.uniform_vec(n, -2.0, 2.0), rng.uniform(-1.0, 1.0)});
    return ConvexFunction::max_affine(std::move(pieces));
}

inline TestFunction random_bump(Rng& rng, int n, double center_span = 0.5, double rmin = 0.8,
                                double rmax = 1.4) {
    Vec c = rng.uniform_vec(n, -center_span, center_span);
    double r = rng.uniform(rmin, rmax);
    int p = rng.uniform_int(4, 6);
    double a = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    return TestFunction(c, r, p, a);
}

/// Random rigid motion: identity rotation in n=1, otherwise a proper
/// rotation, composed with a translation.
inline AffineMap random_rigid_motion(Rng& rng, int n, double shift = 0.5) {
    AffineMap rot = AffineMap::identity(n);
    if (n == 2) rot = AffineMap::rotation2(rng.uniform(0.0, 2 * 3.14159265358979323846));
    if (n == 3) rot = AffineMap::rotation3(rng.unit_vec(3), rng.uniform(0.0, 2 * 3.14159265358979323846));
    AffineMap g(n, rot.matrix(), rng.uniform_vec(n, -shift, shift));
    return g;
}

// ---------------------------------------------------------------------------
// Valuation pairs
// ---------------------------------------------------------------------------

struct ValuationPair {
    ConvexFunction f, h;
    std::string label;
};

/// The 1-d counterexample pair: f = max(-2x, -x), h = max(-x, 0).
inline ValuationPair example_counterexample_pair() {
    auto f = ConvexFunction::max_affine({{Vec{-2.0}, 0.0}, {Vec{-1.0}, 0.0}});
    auto h = ConvexFunction::max_affine({{Vec{-1.0}, 0.0}, {Vec{0.0}, 0.0}});
    return {f, h, "kink-pair"};
}

/// Polyhedral pairs f = F v l1, h = F v l2 where each extra piece dominates
/// the base only in its own far region, so f ^ h recovers F exactly. Pairs
/// whose extra regions happen to overlap are discarded at generation time so
/// every returned pair certifies.
inline std::vector<ValuationPair> polyhedral_pairs(int n, Rng& rng, int count) {
    std::vector<ValuationPair> out;
    if (n == 1) out.push_back(example_counterexample_pair());
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 40 * count) {
        ++attempts;
        ConvexFunction F = random_max_affine(rng, n, 3, 5);
        const auto& base = *F.as_max_affine();
        Vec u = rng.unit_vec(n);
        auto extreme = [&](const Vec& dir) {
            double best = -1e300;
            for (const auto& p : base.pieces) best = std::max(best, dot(p.v, dir));
            return best;
        };
        auto piece_beyond = [&](const Vec& dir) {
            double slope = extreme(dir) + rng.uniform(0.5, 1.5);
            Vec v(n);
            for (int i = 0; i < n; ++i) v[i] = slope * dir[i];
            double t0 = rng.uniform(1.5, 2.5);
            Vec x0(n);
            for (int i = 0; i < n; ++i) x0[i] = t0 * dir[i];
            double b = F.evaluate(x0) - dot(v, x0);
            return AffinePiece{v, b};
        };
        Vec mu = u;
        Vec nu(n);
        for (int i = 0; i < n; ++i) nu[i] = -u[i];
        ConvexFunction f = lattice_max(F, ConvexFunction::max_affine({piece_beyond(mu)}));
        ConvexFunction h = lattice_max(F, ConvexFunction::max_affine({piece_beyond(nu)}));
        if (!lattice_min(f, h)) continue;
        std::ostringstream lbl;
        lbl << "poly-" << n << "d-" << out.size();
        out.push_back({f, h, lbl.str()});
    }
    return out;
}

/// Smooth 1-d crossing pairs with third-order tangential contact:
/// f = 2 x^6 + 5 x^2 (shifted), h = f - gamma (x^2 - r^2)^3. Both convex for
/// gamma <= 0.8, r <= 1.2, and the pointwise min/max stay C^2.
inline ValuationPair sextic_tangent_pair(Rng& rng, int index) {
    double gamma = rng.uniform(0.3, 0.8);
    double r = rng.uniform(0.8, 1.2);
    double shift = rng.uniform(-0.4, 0.4);
    auto sq = [&](double coeff2) {
        SymMatrix A(1);
        A.at(0, 0) = 2.0 * coeff2;
        return A;
    };
    ConvexFunction f = ConvexFunction::sum(ConvexFunction::pnorm(1, 6, 2.0),
                                           ConvexFunction::quadratic(sq(5.0), Vec(1), 0.0));
    double r2 = r * r;
    ConvexFunction h = ConvexFunction::sum(
        ConvexFunction::pnorm(1, 6, 2.0 - gamma),
        ConvexFunction::sum(
            ConvexFunction::scale(3.0 * gamma * r2, ConvexFunction::pnorm(1, 4, 1.0)),
            ConvexFunction::quadratic(sq(5.0 - 3.0 * gamma * r2 * r2), Vec(1), gamma * r2 * r2 * r2)));
    AffineMap g(1, {1.0}, Vec{-shift});
    f = ConvexFunction::pullback(g, f);
    h = ConvexFunction::pullback(g, h);
    std::ostringstream lbl;
    lbl << "sextic-tangent-" << index;
    return {f, h, lbl.str()};
}

/// Smooth pairs: nested perturbations (min equals one operand globally) plus
/// genuinely crossing tangential pairs in n = 1.
inline std::vector<ValuationPair> smooth_pairs(int n, Rng& rng, int count) {
    std::vector<ValuationPair> out;
    int index = 0;
    while (static_cast<int>(out.size()) < count) {
        int kind = index % (n == 1 ? 3 : 2);
        std::ostringstream lbl;
        if (n == 1 && kind == 2) {
            out.push_back(sextic_tangent_pair(rng, index));
        } else if (kind == 0) {
            ConvexFunction f = random_c2(rng, n);
            ConvexFunction h = ConvexFunction::sum(
                f, ConvexFunction::quadratic(SymMatrix::zero(n), Vec(n), rng.uniform(0.1, 1.0)));
            lbl << "nested-const-" << index;
            out.push_back({f, h, lbl.str()});
        } else {
            ConvexFunction f = random_c2(rng, n);
            SymMatrix P(n);
            Vec g = rng.uniform_vec(n, -0.5, 0.5);
            P += SymMatrix::outer(g);
            ConvexFunction h =
                ConvexFunction::sum(f, ConvexFunction::quadratic(P, Vec(n), rng.uniform(0.05, 0.5)));
            lbl << "nested-quad-" << index;
            out.push_back({f, h, lbl.str()});
        }
        ++index;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Valuation identity
// ---------------------------------------------------------------------------

/// Interior zeros of f - h inside a 1-d box, found by scan and bisection.
/// Used to split quadrature panels along the tie set.
inline std::vector<double> tie_cuts_1d(const ConvexFunction& f, const ConvexFunction& h, const Region& B) {
    std::vector<double> cuts;
    if (B.dim() != 1 || !B.is_box()) return cuts;
    double lo = B.lo()[0], hi = B.hi()[0];
    const int N = 512;
    auto d = [&](double x) { return f.evaluate(Vec{x}) - h.evaluate(Vec{x}); };
    double prev = d(lo), xprev = lo;
    for (int i = 1; i <= N; ++i) {
        double x = lo + (hi - lo) * i / N;
        double cur = d(x);
        if (prev == 0.0) cuts.push_back(xprev);
        else if (cur != 0.0 && std::signbit(cur) != std::signbit(prev)) {
            double a = xprev, b = x;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (a + b);
                double dm = d(mid);
                if (dm == 0.0) {
                    a = b = mid;
                    break;
                }
                if (std::signbit(dm) == std::signbit(prev)) a = mid;
                else b = mid;
            }
            cuts.push_back(0.5 * (a + b));
        }
        prev = cur;
        xprev = x;
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-9; }),
               cuts.end());
    return cuts;
}

/// Pairing of evaluate(spec, fn, B) against phi, with the 1-d box optionally
/// subdivided at the given cuts so panels do not straddle the tie set.
inline double valuation_pairing(const FunctionalSpec& spec, const ConvexFunction& fn, const Region& B,
                                int order, const TestFunction& phi, const std::vector<double>& cuts) {
    if (cuts.empty() || B.dim() != 1 || !B.is_box()) return pair(evaluate(spec, fn, B, order), phi);
    double lo = B.lo()[0], hi = B.hi()[0];
    std::vector<double> xs{lo};
    for (double c : cuts)
        if (c > lo + 1e-9 && c < hi - 1e-9) xs.push_back(c);
    xs.push_back(hi);
    double total = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (xs[i + 1] - xs[i] < 1e-10) continue;
        total += pair(evaluate(spec, fn, Region::box(Vec{xs[i]}, Vec{xs[i + 1]}), order), phi);
    }
    return total;
}

/// Per-pair residual of Psi(f v h) + Psi(f ^ h) - Psi(f) - Psi(h) against
/// each test function; pairs whose min fails certification are skipped.
inline SuiteReport check_valuation(const FunctionalSpec& spec, const std::vector<ValuationPair>& pairs,
                                   const std::vector<TestFunction>& phis, const Region& B, int order = 20,
                                   double tol = 5e-4) {
    SuiteReport rep;
    rep.suite = "valuation";
    for (const auto& pr : pairs) {
        TrialResult tr;
        tr.inputs_hash = fnv1a_hex("valuation:" + pr.label);
        auto mn = lattice_min(pr.f, pr.h);
        if (!mn) {
            tr.skipped = true;
            tr.note = "NotConvex pair skipped";
            rep.add(std::move(tr));
            continue;
        }
        bool both_pl = pr.f.as_max_affine() && pr.h.as_max_affine();
        ConvexFunction mx = both_pl ? lattice_max(pr.f, pr.h) : certified_max_node(pr.f, pr.h);
        std::vector<double> cuts;
        if (spec.requires_c2() && spec.dim() == 1) cuts = tie_cuts_1d(pr.f, pr.h, B);
        double worst = 0;
        try {
            for (const auto& phi : phis) {
                double pf = valuation_pairing(spec, pr.f, B, order, phi, cuts);
                double ph = valuation_pairing(spec, pr.h, B, order, phi, cuts);
                double pmx = valuation_pairing(spec, mx, B, order, phi, cuts);
                double pmn = valuation_pairing(spec, *mn, B, order, phi, cuts);
                double resid = std::abs(pmx + pmn - pf - ph);
                double scale = std::max({1.0, std::abs(pf), std::abs(ph), std::abs(pmx), std::abs(pmn)});
                worst = std::max(worst, resid / scale);
            }
        } catch (const not_c2&) {
            tr.skipped = true;
            tr.note = "pair not applicable to this functional";
            rep.add(std::move(tr));
            continue;
        } catch (const wrong_representation&) {
            tr.skipped = true;
            tr.note = "pair not applicable to this functional";
            rep.add(std::move(tr));
            continue;
        }
        tr.residual = worst;
        tr.pass = worst < tol;
        rep.add(std::move(tr));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Rigid motion invariance
// ---------------------------------------------------------------------------

inline SuiteReport check_rigid_motion_invariance(const FunctionalSpec& spec, int trials,
                                                 std::uint64_t seed = 1, int order = 24,
                                                 double tol = 1e-5) {
    SuiteReport rep;
    rep.suite = "invariance";
    rep.seed = seed;
    int n = spec.dim();
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Rng trial = rng.split();
        ConvexFunction f = random_c2(trial, n);
        TestFunction phi = random_bump(trial, n);
        Region B = phi.support();
        AffineMap g = random_rigid_motion(trial, n);
        double rhs = pair(evaluate(spec, f, B, order), phi);
        double lhs = pair(pushforward_evaluate(spec, g, f, B, order), phi);
        TrialResult tr;
        std::ostringstream lbl;
        lbl << "invariance:" << t;
        tr.inputs_hash = fnv1a_hex(lbl.str());
        tr.residual = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
        tr.pass = tr.residual < tol;
        rep.add(std::move(tr));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Invariant basis and linear independence
// ---------------------------------------------------------------------------

struct BasisElement {
    FunctionalSpec spec;
    std::string label;
};

/// Basis of rigid-motion invariant functionals of homogeneity k within
/// polynomial degree d: E^{k-2j-i, j}_i over the classification index
/// ranges, F^{k-2j-i, j}_i for the middle multiplicities, and for n = 2 the
/// quarter-turn family. In n = 2 the E terms with i = 1, j >= 1 are omitted:
/// v v^T + (Iv)(Iv)^T = |v|^2 Id makes E^{a,b}_1 = F^{a,b}_1 + Ft^{a,b},
/// so keeping all three would be an exact linear dependence.
inline std::vector<BasisElement> invariant_basis(int n, int k, int d) {
    if (n < 2 || n > 3) throw precondition_error("invariant basis implemented for n in {2,3}");
    std::vector<BasisElement> out;
    auto label = [](const char* fam, int a, int b, int c) {
        std::ostringstream s;
        s << fam << "^{" << a << "," << b << "}_" << c;
        return s.str();
    };
    for (int i = 0; i <= std::min(n, k); ++i) {
        int jmax = std::min(k - i, d) / 2;
        for (int j = 0; j <= jmax; ++j) {
            if (n == 2 && i == 1 && j >= 1) continue;
            int a = k - 2 * j - i;
            out.push_back({FunctionalSpec::e_fam(n, a, j, i), label("E", a, j, i)});
        }
    }
    for (int i = 1; i <= std::min(n - 1, k); ++i) {
        int jmax = std::min(k - i, d) / 2;
        for (int j = 1; j <= jmax; ++j) {
            int a = k - 2 * j - i;
            out.push_back({FunctionalSpec::f_fam(n, a, j, i), label("F", a, j, i)});
        }
    }
    if (n == 2) {
        int jmax = std::min(k - 1, d) / 2;
        for (int j = 1; j <= jmax; ++j) {
            int b = k - 2 * j - 1;
            out.push_back({FunctionalSpec::f_tilde(2, b, j), label("Ft", b, j, 1)});
        }
    }
    return out;
}

/// Sampling-rank check: pair every basis element against shared random
/// probes and require the smallest singular value of the probe matrix to
/// stay above 1e-6 of the largest. append_duplicate adds a copied column as
/// a rank-deficiency control.
inline SuiteReport check_linear_independence(int n, int k, int d, std::uint64_t seed = 1, int order = 16,
                                             bool append_duplicate = false, double tol = 1e-6) {
    SuiteReport rep;
    rep.suite = "independence";
    rep.seed = seed;
    auto basis = invariant_basis(n, k, d);
    std::size_t cols = basis.size() + (append_duplicate ? 1 : 0);
    if (basis.empty()) return rep;
    std::size_t rows = std::max<std::size_t>(3 * cols, cols + 4);
    Rng rng(seed);
    std::vector<std::vector<double>> M(rows, std::vector<double>(cols, 0.0));
    for (std::size_t p = 0; p < rows; ++p) {
        Rng trial = rng.split();
        ConvexFunction f = random_c2(trial, n);
        TestFunction phi = random_bump(trial, n, 0.4, 0.7, 1.2);
        phi.amplitude = 1.0;
        Region B = phi.support();
        for (std::size_t c = 0; c < basis.size(); ++c)
            M[p][c] = pair(evaluate(basis[c].spec, f, B, order), phi);
        if (append_duplicate) M[p][cols - 1] = M[p][0];
    }
    // column-normalized Gram matrix
    std::vector<double> nrm(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t p = 0; p < rows; ++p) nrm[c] += M[p][c] * M[p][c];
        nrm[c] = std::sqrt(std::max(nrm[c], 1e-300));
    }
    std::vector<double> gram(cols * cols, 0.0);
    for (std::size_t a = 0; a < cols; ++a)
        for (std::size_t b = 0; b < cols; ++b) {
            double s = 0;
            for (std::size_t p = 0; p < rows; ++p) s += M[p][a] * M[p][b];
            gram[a * cols + b] = s / (nrm[a] * nrm[b]);
        }
    auto ev = jacobi_eigenvalues(gram, static_cast<int>(cols));
    double ratio = std::sqrt(std::max(ev.front(), 0.0) / std::max(ev.back(), 1e-300));
    TrialResult tr;
    std::ostringstream lbl;
    lbl << "independence:n=" << n << ",k=" << k << ",d=" << d << ",basis=" << basis.size();
    tr.inputs_hash = fnv1a_hex(lbl.str());
    tr.residual = ratio;
    tr.pass = ratio > tol;
    tr.note = lbl.str();
    rep.add(std::move(tr));
    return rep;
}

// ---------------------------------------------------------------------------
// Semi-norm estimator
// ---------------------------------------------------------------------------

/// sup |f| over A + delta B_1(0) by dense sampling of the inflated bounding
/// box filtered to distance <= delta.
inline double sup_on_inflated(const ConvexFunction& f, const Region& A, double delta) {
    auto [lo, hi] = A.bounds();
    int n = A.dim();
    for (int i = 0; i < n; ++i) {
        lo[i] -= delta;
        hi[i] += delta;
    }
    int per_axis = (n == 1) ? 257 : (n == 2) ? 65 : 25;
    double best = 0;
    std::array<int, 3> idx{0, 0, 0};
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= per_axis;
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t rem = k;
        Vec x(n);
        for (int i = 0; i < n; ++i) {
            idx[i] = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (per_axis - 1);
        }
        if (A.distance(x) > delta + 1e-12) continue;
        best = std::max(best, std::abs(f.evaluate(x)));
    }
    return best;
}

struct SeminormOptions {
    int samples = 24;
    std::uint64_t seed = 7;
    double bound = 1.0;  // normalization level for sup |f|
    int order = 20;
    double lse_beta = 20.0;
};

/// Sampled lower bound for the semi-norm: max over normalized random convex
/// functions and admissible bumps of |Psi(f; phi)|. Monotone nonincreasing
/// in delta on a fixed seed set.
inline double estimate_seminorm(const FunctionalSpec& spec, const Region& A, double delta,
                                SeminormOptions opt = {}) {
    if (!(delta > 0)) throw precondition_error("delta must be positive");
    int n = spec.dim();
    if (A.dim() != n) throw dimension_mismatch("region dimension");
    Rng rng(opt.seed);
    double best = 0;
    for (int s = 0; s < opt.samples; ++s) {
        Rng trial = rng.split();
        ConvexFunction f = (s % 2 == 0)
                               ? random_c2(trial, n)
                               : (spec.requires_c2()
                                      ? ConvexFunction::log_sum_exp(
                                            random_max_affine(trial, n).as_max_affine()->pieces, opt.lse_beta)
                                      : random_max_affine(trial, n));
        double sup = sup_on_inflated(f, A, delta);
        if (sup < 1e-12) continue;
        ConvexFunction fn = ConvexFunction::scale(opt.bound / sup, f);
        // admissible bump: support inside A, sup-norm 1
        auto [lo, hi] = A.bounds();
        double halfmin = 1e300;
        for (int i = 0; i < n; ++i) halfmin = std::min(halfmin, 0.5 * (hi[i] - lo[i]));
        double r = trial.uniform(0.3, 0.9) * (A.is_box() ? halfmin : A.radius());
        Vec c(n);
        if (A.is_box()) {
            for (int i = 0; i < n; ++i) c[i] = trial.uniform(lo[i] + r, hi[i] - r);
        } else {
            Vec dir = trial.unit_vec(n);
            double rho = trial.uniform(0.0, A.radius() - r);
            for (int i = 0; i < n; ++i) c[i] = A.center()[i] + rho * dir[i];
        }
        TestFunction phi(c, r, trial.uniform_int(3, 5), trial.uniform() < 0.5 ? -1.0 : 1.0);
        best = std::max(best, std::abs(pair(evaluate(spec, fn, A, opt.order), phi)));
    }
    return best;
}

}  // namespace maval
