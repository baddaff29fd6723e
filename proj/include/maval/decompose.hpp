#pragma once

// Structural decompositions applied to black-box functionals: homogeneous
// components via integer-node interpolation, translative components in the
// affine argument, finite-difference polarization of homogeneous
// functionals, and elementary-tensor values of the induced multilinear
// distribution on compactly supported C^2 perturbations.

#include <functional>
#include <vector>

#include "maval/convexfn.hpp"
#include "maval/functionals.hpp"

namespace maval {

/// A caller-asserted continuous polynomial local functional, seen only
/// through pairings. phi == nullptr pairs against the constant-1 proxy
/// (total mass over B).
struct BlackBoxFunctional {
    int dim = 1;
    int degree = 0;  // polynomial degree bound in the affine argument
    std::function<double(const ConvexFunction&, const Region&, const TestFunction*)> eval;

    double operator()(const ConvexFunction& f, const Region& B, const TestFunction* phi) const {
        return eval(f, B, phi);
    }
};

/// Wrap a builtin spec at a fixed quadrature order.
inline BlackBoxFunctional black_box(const FunctionalSpec& spec, int order) {
    BlackBoxFunctional bb;
    bb.dim = spec.dim();
    bb.degree = spec.degree_bound();
    bb.eval = [spec, order](const ConvexFunction& f, const Region& B, const TestFunction* phi) {
        RadonMeasure mu = evaluate(spec, f, B, order);
        return phi ? pair(mu, *phi) : mu.total_mass();
    };
    return bb;
}

/// Z_k(f) pairing: sum_j c_{kj} Psi(j f) with c the inverse Vandermonde over
/// nodes 0..n+d.
inline double homogeneous_component(const BlackBoxFunctional& psi, int k, const ConvexFunction& f,
                                    const Region& B, const TestFunction* phi) {
    int m = psi.dim + psi.degree;
    if (k < 0 || k > m) throw precondition_error("homogeneous component index out of range");
    VandermondeCoeffs vc = vandermonde_inverse(m);
    std::vector<double> terms;
    terms.reserve(m + 1);
    for (int j = 0; j <= m; ++j) {
        double cj = vc.c[k][j];
        if (cj == 0.0) continue;
        terms.push_back(cj * psi(ConvexFunction::scale(static_cast<double>(j), f), B, phi));
    }
    return sorted_sum(std::move(terms));
}

/// Y_j(f)[ell] pairing: the degree-j coefficient of t -> Psi(f + t ell),
/// interpolated over nodes 0..d.
inline double translative_component(const BlackBoxFunctional& psi, int j, const ConvexFunction& f,
                                    const AffineFunctional& ell, const Region& B, const TestFunction* phi) {
    int d = psi.degree;
    if (j < 0 || j > d) throw precondition_error("translative component index out of range");
    if (ell.dim() != psi.dim) throw dimension_mismatch("affine functional dimension");
    if (d == 0) return psi(f, B, phi);
    VandermondeCoeffs vc = vandermonde_inverse(d);
    std::vector<double> terms;
    terms.reserve(d + 1);
    for (int m = 0; m <= d; ++m) {
        double cm = vc.c[j][m];
        if (cm == 0.0) continue;
        AffineFunctional mell{m * ell.s, static_cast<double>(m) * ell.v};
        terms.push_back(cm * psi(add_affine(f, mell), B, phi));
    }
    return sorted_sum(std::move(terms));
}

namespace detail {

/// Sum of the selected functions, built in ascending index order so equal
/// index sets always produce the same tree.
inline ConvexFunction indexed_sum(const std::vector<ConvexFunction>& fs, unsigned mask) {
    ConvexFunction acc;
    bool first = true;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (!(mask & (1u << i))) continue;
        acc = first ? fs[i] : ConvexFunction::sum(acc, fs[i]);
        first = false;
    }
    return acc;
}

}  // namespace detail

/// Finite-difference polarization of a k-homogeneous functional,
/// k = fs.size():  (1/k!) sum_{S nonempty} (-1)^{k-|S|} mu(sum_{i in S} f_i).
/// A cheap 2^k-homogeneity pre-check runs first and throws on failure.
inline double polarize(const BlackBoxFunctional& mu, const std::vector<ConvexFunction>& fs, const Region& B,
                       const TestFunction* phi, bool precheck = true) {
    int k = static_cast<int>(fs.size());
    if (k < 1) throw precondition_error("polarize needs at least one function");
    for (const auto& f : fs)
        if (f.dim() != mu.dim) throw dimension_mismatch("polarize argument dimension");
    if (precheck) {
        ConvexFunction h = detail::indexed_sum(fs, (1u << k) - 1);
        double m1 = mu(h, B, phi);
        double m2 = mu(ConvexFunction::scale(2.0, h), B, phi);
        double want = std::ldexp(m1, k);  // 2^k m1
        if (std::abs(m2 - want) > 1e-6 * (1.0 + std::abs(m1) + std::abs(m2)))
            throw precondition_error("polarize: functional is not homogeneous of the asserted degree");
    }
    double kfact = 1;
    for (int i = 2; i <= k; ++i) kfact *= i;
    std::vector<double> terms;
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        int bits = __builtin_popcount(mask);
        double sign = ((k - bits) % 2 == 0) ? 1.0 : -1.0;
        terms.push_back(sign * mu(detail::indexed_sum(fs, mask), B, phi));
    }
    return sorted_sum(std::move(terms)) / kfact;
}

struct GwOptions {
    double m_multiplier = 2.0;  // auxiliary quadratic strength, times the bump bound
    int max_attempts = 8;
};

/// Elementary-tensor value GW(mu)[phi_1 x ... x phi_k] of the polarization's
/// multilinear extension, paired with phi_outer over B. Auxiliary convex
/// functions f_j = M_j/2 |x|^2 dominate the bump Hessians so f_j + phi_j is
/// convex; the symmetric-group average collapses to a subset sum because the
/// polarization is symmetric.
inline double gw_elementary_tensor(const BlackBoxFunctional& mu, const std::vector<TestFunction>& phis,
                                   const Region& B, const TestFunction* phi_outer, GwOptions opt = {}) {
    int k = static_cast<int>(phis.size());
    if (k < 1 || k > 3) throw precondition_error("gw_elementary_tensor supports 1 <= k <= 3");
    for (const auto& p : phis)
        if (p.dim() != mu.dim) throw dimension_mismatch("gw test function dimension");

    std::vector<ConvexFunction> fs, hs;
    for (const auto& bump : phis) {
        double M = opt.m_multiplier * bump.hessian_norm_bound();
        bool built = false;
        for (int attempt = 0; attempt < opt.max_attempts && !built; ++attempt, M *= 2) {
            try {
                hs.push_back(ConvexFunction::bump_offset(M, bump));
                fs.push_back(ConvexFunction::quadratic(M * SymMatrix::identity(mu.dim), Vec(mu.dim), 0.0));
                built = true;
            } catch (const precondition_error&) {
            }
        }
        if (!built) throw precondition_error("gw_elementary_tensor: convexity repair failed");
    }

    double kfact = 1;
    for (int i = 2; i <= k; ++i) kfact *= i;
    std::vector<double> terms;
    // outer subsets S: which slots carry h_i = f_i + phi_i instead of f_i;
    // inner subsets T: the polarization's finite differences
    for (unsigned smask = 0; smask < (1u << k); ++smask) {
        int sbits = __builtin_popcount(smask);
        double souter = ((k - sbits) % 2 == 0) ? 1.0 : -1.0;
        std::vector<ConvexFunction> args;
        args.reserve(k);
        for (int i = 0; i < k; ++i) args.push_back((smask & (1u << i)) ? hs[i] : fs[i]);
        for (unsigned tmask = 1; tmask < (1u << k); ++tmask) {
            int tbits = __builtin_popcount(tmask);
            double stinner = ((k - tbits) % 2 == 0) ? 1.0 : -1.0;
            terms.push_back(souter * stinner * mu(detail::indexed_sum(args, tmask), B, phi_outer));
        }
    }
    return sorted_sum(std::move(terms)) / kfact;
}

}  // namespace maval
