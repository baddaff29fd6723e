#pragma once

// Finite convex functions on R^n as immutable expression trees: smooth leaves
// (quadratic, log-sum-exp, even p-norm powers), polyhedral max-affine leaves,
// and the closure operations (sum, pointwise max, nonnegative scaling, affine
// pullback). lattice_min returns a certified representation of the pointwise
// minimum or reports that the pair is not a valid valuation test pair.

#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "maval/common.hpp"
#include "maval/linalg.hpp"
#include "maval/measure.hpp"

namespace maval {

class ConvexFunction;

struct AffinePiece {
    Vec v;
    double b = 0.0;
};

namespace body {

struct Quadratic {
    SymMatrix A;
    Vec v;
    double s = 0.0;
};
struct MaxAffine {
    std::vector<AffinePiece> pieces;
};
struct LogSumExp {
    std::vector<AffinePiece> pieces;
    double beta = 20.0;
};
struct PNorm {
    int p = 4;
    double c = 1.0;
};
struct Sum {
    std::shared_ptr<const ConvexFunction> left, right;
};
struct Max {
    std::shared_ptr<const ConvexFunction> left, right;
};
/// Pointwise min certified convex by lattice_min; not constructible directly.
struct Min {
    std::shared_ptr<const ConvexFunction> left, right;
};
struct Scale {
    double t = 1.0;
    std::shared_ptr<const ConvexFunction> inner;
};
struct Pullback {
    AffineMap g;
    std::shared_ptr<const ConvexFunction> inner;
};
/// m/2 |x|^2 + bump, convex when m dominates the bump Hessian. Internal leaf
/// used to feed compactly supported C^2 perturbations through functionals.
struct BumpOffset {
    double m = 1.0;
    TestFunction bump;
};

using Variant = std::variant<Quadratic, MaxAffine, LogSumExp, PNorm, Sum, Max, Min, Scale, Pullback, BumpOffset>;

}  // namespace body

inline constexpr double kTieGapTol = 1e-10;  // max-affine tie detection on value gaps

class ConvexFunction {
  public:
    // -- constructors -------------------------------------------------------

    /// f(x) = 1/2 x^T A x + <v,x> + s, A positive semidefinite.
    static ConvexFunction quadratic(const SymMatrix& A, const Vec& v, double s) {
        if (A.dim() != v.dim()) throw dimension_mismatch("quadratic A/v dimension");
        double scale = 1.0;
        for (int i = 0; i < A.dim(); ++i) scale = std::max(scale, std::abs(A(i, i)));
        if (min_eigenvalue(A) < -1e-10 * scale)
            throw precondition_error("quadratic matrix must be positive semidefinite");
        return make(v.dim(), true, body::Quadratic{A, v, s});
    }

    static ConvexFunction max_affine(std::vector<AffinePiece> pieces) {
        if (pieces.empty()) throw precondition_error("max_affine needs at least one piece");
        int n = pieces.front().v.dim();
        for (const auto& p : pieces)
            if (p.v.dim() != n) throw dimension_mismatch("max_affine piece dimension");
        return make(n, pieces.size() == 1, body::MaxAffine{std::move(pieces)});
    }

    static ConvexFunction log_sum_exp(std::vector<AffinePiece> pieces, double beta = 20.0) {
        if (pieces.empty()) throw precondition_error("log_sum_exp needs at least one piece");
        if (!(beta > 0)) throw precondition_error("log_sum_exp sharpness must be positive");
        int n = pieces.front().v.dim();
        for (const auto& p : pieces)
            if (p.v.dim() != n) throw dimension_mismatch("log_sum_exp piece dimension");
        return make(n, true, body::LogSumExp{std::move(pieces), beta});
    }

    /// f(x) = c * sum_j x_j^p, p even integer >= 2.
    static ConvexFunction pnorm(int dim, int p, double c) {
        if (p < 2 || p % 2 != 0) throw precondition_error("pnorm exponent must be an even integer >= 2");
        if (!(c > 0)) throw precondition_error("pnorm scale must be positive");
        if (dim < 1 || dim > kMaxDim) throw dimension_mismatch("dimension must be 1, 2 or 3");
        return make(dim, true, body::PNorm{p, c});
    }

    static ConvexFunction sum(const ConvexFunction& f, const ConvexFunction& h) {
        require_same(f, h);
        return make(f.dim(), f.is_c2() && h.is_c2(), body::Sum{ptr(f), ptr(h)});
    }

    static ConvexFunction scale(double t, const ConvexFunction& f) {
        if (!(t >= 0)) throw precondition_error("scale factor must be nonnegative");
        return make(f.dim(), f.is_c2(), body::Scale{t, ptr(f)});
    }

    static ConvexFunction pullback(const AffineMap& g, const ConvexFunction& f) {
        if (g.dim() != f.dim()) throw dimension_mismatch("pullback map dimension");
        return make(f.dim(), f.is_c2(), body::Pullback{g, ptr(f)});
    }

    static ConvexFunction bump_offset(double m, const TestFunction& bump) {
        if (!(m >= bump.hessian_norm_bound()))
            throw precondition_error("bump_offset: quadratic term does not dominate the bump Hessian");
        return make(bump.dim(), true, body::BumpOffset{m, bump});
    }

    // -- observers ----------------------------------------------------------

    int dim() const { return node_->dim; }
    bool is_c2() const { return node_->c2; }
    const body::Variant& body_variant() const { return node_->v; }

    const body::MaxAffine* as_max_affine() const { return std::get_if<body::MaxAffine>(&node_->v); }

    double evaluate(const Vec& x) const {
        require_dim(x);
        return eval_impl(x);
    }

    Vec gradient(const Vec& x) const {
        require_dim(x);
        return grad_impl(x);
    }

    SymMatrix hessian(const Vec& x) const {
        require_dim(x);
        if (!is_c2()) throw not_c2("function is not C^2");
        return hess_impl(x);
    }

    /// Subdifferential interval [f'_-(x), f'_+(x)] for n = 1, exact on the
    /// tree structure.
    std::pair<double, double> subdifferential_1d(double x) const {
        if (dim() != 1) throw dimension_mismatch("subdifferential_1d requires n = 1");
        return subdiff_impl(x);
    }

    bool same_representation(const ConvexFunction& o) const;

  private:
    struct Node {
        int dim;
        bool c2;
        body::Variant v;
    };

    static ConvexFunction make(int dim, bool c2, body::Variant v) {
        ConvexFunction f;
        f.node_ = std::make_shared<const Node>(Node{dim, c2, std::move(v)});
        return f;
    }
    static std::shared_ptr<const ConvexFunction> ptr(const ConvexFunction& f) {
        return std::make_shared<const ConvexFunction>(f);
    }
    static void require_same(const ConvexFunction& f, const ConvexFunction& h) {
        if (f.dim() != h.dim()) throw dimension_mismatch("operand dimension mismatch");
    }
    void require_dim(const Vec& x) const {
        if (x.dim() != dim()) throw dimension_mismatch("argument dimension");
    }

    double eval_impl(const Vec& x) const;
    Vec grad_impl(const Vec& x) const;
    SymMatrix hess_impl(const Vec& x) const;
    std::pair<double, double> subdiff_impl(double x) const;

    friend ConvexFunction certified_min_node(const ConvexFunction&, const ConvexFunction&);
    friend ConvexFunction certified_max_node(const ConvexFunction&, const ConvexFunction&);
    friend ConvexFunction lattice_max(const ConvexFunction&, const ConvexFunction&);

    std::shared_ptr<const Node> node_;
};

/// Internal: wrap a certified-convex pointwise minimum. Callers go through
/// lattice_min, which performs the certification.
inline ConvexFunction certified_min_node(const ConvexFunction& f, const ConvexFunction& h) {
    return ConvexFunction::make(f.dim(), f.is_c2() && h.is_c2(),
                                body::Min{ConvexFunction::ptr(f), ConvexFunction::ptr(h)});
}

/// Internal: pointwise max of a pair whose minimum was certified convex.
/// Certification forces tangential contact, so the max of two C^2 branches
/// is twice differentiable off a null set and safe to feed to quadrature.
inline ConvexFunction certified_max_node(const ConvexFunction& f, const ConvexFunction& h) {
    return ConvexFunction::make(f.dim(), f.is_c2() && h.is_c2(),
                                body::Max{ConvexFunction::ptr(f), ConvexFunction::ptr(h)});
}

// ---------------------------------------------------------------------------
// Calculus
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> piece_values(const std::vector<AffinePiece>& ps, const Vec& x) {
    std::vector<double> vals;
    vals.reserve(ps.size());
    for (const auto& p : ps) vals.push_back(dot(p.v, x) + p.b);
    return vals;
}

/// Softmax weights at sharpness beta, numerically stable.
inline std::vector<double> softmax(const std::vector<double>& vals, double beta) {
    double top = *std::max_element(vals.begin(), vals.end());
    std::vector<double> w(vals.size());
    double z = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        w[i] = std::exp(beta * (vals[i] - top));
        z += w[i];
    }
    for (auto& wi : w) wi /= z;
    return w;
}

}  // namespace detail

inline double ConvexFunction::eval_impl(const Vec& x) const {
    return std::visit(
        [&](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, body::Quadratic>) {
                return 0.5 * b.A.quad_form(x) + dot(b.v, x) + b.s;
            } else if constexpr (std::is_same_v<T, body::MaxAffine>) {
                auto vals = detail::piece_values(b.pieces, x);
                return *std::max_element(vals.begin(), vals.end());
            } else if constexpr (std::is_same_v<T, body::LogSumExp>) {
                auto vals = detail::piece_values(b.pieces, x);
                double top = *std::max_element(vals.begin(), vals.end());
                double z = 0;
                for (double v : vals) z += std::exp(b.beta * (v - top));
                return top + std::log(z) / b.beta;
            } else if constexpr (std::is_same_v<T, body::PNorm>) {
                double s = 0;
                for (int i = 0; i < x.dim(); ++i) s += std::pow(x[i], b.p);
                return b.c * s;
            } else if constexpr (std::is_same_v<T, body::Sum>) {
                return b.left->eval_impl(x) + b.right->eval_impl(x);
            } else if constexpr (std::is_same_v<T, body::Max>) {
                return std::max(b.left->eval_impl(x), b.right->eval_impl(x));
            } else if constexpr (std::is_same_v<T, body::Min>) {
                return std::min(b.left->eval_impl(x), b.right->eval_impl(x));
            } else if constexpr (std::is_same_v<T, body::Scale>) {
                return b.t * b.inner->eval_impl(x);
            } else if constexpr (std::is_same_v<T, body::Pullback>) {
                return b.inner->eval_impl(b.g.apply(x));
            } else {  // BumpOffset
                return 0.5 * b.m * norm2(x) + b.bump(x);
            }
        },
        node_->v);
}

inline Vec ConvexFunction::grad_impl(const Vec& x) const {
    return std::visit(
        [&](const auto& b) -> Vec {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, body::Quadratic>) {
                return b.A.apply(x) + b.v;
            } else if constexpr (std::is_same_v<T, body::MaxAffine>) {
                auto vals = detail::piece_values(b.pieces, x);
                std::size_t best = std::max_element(vals.begin(), vals.end()) - vals.begin();
                double tol = kTieGapTol * (1.0 + std::abs(vals[best]));
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    if (i == best) continue;
                    if (vals[best] - vals[i] <= tol &&
                        norm(b.pieces[i].v - b.pieces[best].v) > 1e-12)
                        throw not_differentiable("max_affine tie at evaluation point");
                }
                return b.pieces[best].v;
            } else if constexpr (std::is_same_v<T, body::LogSumExp>) {
                auto vals = detail::piece_values(b.pieces, x);
                auto w = detail::softmax(vals, b.beta);
                Vec g(x.dim());
                for (std::size_t i = 0; i < w.size(); ++i) g += w[i] * b.pieces[i].v;
                return g;
            } else if constexpr (std::is_same_v<T, body::PNorm>) {
                Vec g(x.dim());
                for (int i = 0; i < x.dim(); ++i) g[i] = b.c * b.p * std::pow(x[i], b.p - 1);
                return g;
            } else if constexpr (std::is_same_v<T, body::Sum>) {
                return b.left->grad_impl(x) + b.right->grad_impl(x);
            } else if constexpr (std::is_same_v<T, body::Max>) {
                double fl = b.left->eval_impl(x), fr = b.right->eval_impl(x);
                double tol = kTieGapTol * (1.0 + std::abs(std::max(fl, fr)));
                if (std::abs(fl - fr) <= tol) {
                    Vec gl = b.left->grad_impl(x), gr = b.right->grad_impl(x);
                    if (norm(gl - gr) <= 1e-8 * (1.0 + norm(gl))) return gl;
                    throw not_differentiable("max tie at evaluation point");
                }
                return fl > fr ? b.left->grad_impl(x) : b.right->grad_impl(x);
            } else if constexpr (std::is_same_v<T, body::Min>) {
                double fl = b.left->eval_impl(x), fr = b.right->eval_impl(x);
                double tol = kTieGapTol * (1.0 + std::abs(std::min(fl, fr)));
                if (std::abs(fl - fr) <= tol) {
                    Vec gl = b.left->grad_impl(x), gr = b.right->grad_impl(x);
                    if (norm(gl - gr) <= 1e-8 * (1.0 + norm(gl))) return gl;
                    throw not_differentiable("min tie at evaluation point");
                }
                return fl < fr ? b.left->grad_impl(x) : b.right->grad_impl(x);
            } else if constexpr (std::is_same_v<T, body::Scale>) {
                return b.t * b.inner->grad_impl(x);
            } else if constexpr (std::is_same_v<T, body::Pullback>) {
                return b.g.apply_transpose(b.inner->grad_impl(b.g.apply(x)));
            } else {  // BumpOffset
                Vec g = b.bump.gradient_at(x);
                for (int i = 0; i < x.dim(); ++i) g[i] += b.m * x[i];
                return g;
            }
        },
        node_->v);
}

inline SymMatrix ConvexFunction::hess_impl(const Vec& x) const {
    return std::visit(
        [&](const auto& b) -> SymMatrix {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, body::Quadratic>) {
                return b.A;
            } else if constexpr (std::is_same_v<T, body::MaxAffine>) {
                if (b.pieces.size() == 1) return SymMatrix::zero(x.dim());
                throw not_c2("max_affine has no Hessian");
            } else if constexpr (std::is_same_v<T, body::LogSumExp>) {
                auto vals = detail::piece_values(b.pieces, x);
                auto w = detail::softmax(vals, b.beta);
                Vec mean(x.dim());
                for (std::size_t i = 0; i < w.size(); ++i) mean += w[i] * b.pieces[i].v;
                SymMatrix h(x.dim());
                for (std::size_t i = 0; i < w.size(); ++i) {
                    Vec d = b.pieces[i].v - mean;
                    h += (b.beta * w[i]) * SymMatrix::outer(d);
                }
                return h;
            } else if constexpr (std::is_same_v<T, body::PNorm>) {
                SymMatrix h(x.dim());
                for (int i = 0; i < x.dim(); ++i)
                    h.at(i, i) = b.c * b.p * (b.p - 1) * std::pow(x[i], b.p - 2);
                return h;
            } else if constexpr (std::is_same_v<T, body::Sum>) {
                return b.left->hess_impl(x) + b.right->hess_impl(x);
            } else if constexpr (std::is_same_v<T, body::Max>) {
                // reachable only through certified max nodes (is_c2 gate)
                double fl = b.left->eval_impl(x), fr = b.right->eval_impl(x);
                return fl >= fr ? b.left->hess_impl(x) : b.right->hess_impl(x);
            } else if constexpr (std::is_same_v<T, body::Min>) {
                double fl = b.left->eval_impl(x), fr = b.right->eval_impl(x);
                return fl <= fr ? b.left->hess_impl(x) : b.right->hess_impl(x);
            } else if constexpr (std::is_same_v<T, body::Scale>) {
                return b.t * b.inner->hess_impl(x);
            } else if constexpr (std::is_same_v<T, body::Pullback>) {
                SymMatrix inner = b.inner->hess_impl(b.g.apply(x));
                return inner.conjugate(b.g.matrix());
            } else {  // BumpOffset
                SymMatrix h = b.bump.hessian_at(x);
                for (int i = 0; i < x.dim(); ++i) h.at(i, i) += b.m;
                return h;
            }
        },
        node_->v);
}

inline std::pair<double, double> ConvexFunction::subdiff_impl(double x) const {
    Vec xv{x};
    return std::visit(
        [&](const auto& b) -> std::pair<double, double> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, body::MaxAffine>) {
                auto vals = detail::piece_values(b.pieces, xv);
                double top = *std::max_element(vals.begin(), vals.end());
                double tol = kTieGapTol * (1.0 + std::abs(top));
                double lo = 0, hi = 0;
                bool first = true;
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    if (top - vals[i] > tol) continue;
                    double s = b.pieces[i].v[0];
                    if (first) {
                        lo = hi = s;
                        first = false;
                    } else {
                        lo = std::min(lo, s);
                        hi = std::max(hi, s);
                    }
                }
                return {lo, hi};
            } else if constexpr (std::is_same_v<T, body::Sum>) {
                auto [l1, h1] = b.left->subdiff_impl(x);
                auto [l2, h2] = b.right->subdiff_impl(x);
                return {l1 + l2, h1 + h2};
            } else if constexpr (std::is_same_v<T, body::Max>) {
                double fl = b.left->eval_impl(xv), fr = b.right->eval_impl(xv);
                double tol = kTieGapTol * (1.0 + std::abs(std::max(fl, fr)));
                if (fl - fr > tol) return b.left->subdiff_impl(x);
                if (fr - fl > tol) return b.right->subdiff_impl(x);
                auto [l1, h1] = b.left->subdiff_impl(x);
                auto [l2, h2] = b.right->subdiff_impl(x);
                return {std::min(l1, l2), std::max(h1, h2)};
            } else if constexpr (std::is_same_v<T, body::Min>) {
                double fl = b.left->eval_impl(xv), fr = b.right->eval_impl(xv);
                double tol = kTieGapTol * (1.0 + std::abs(std::min(fl, fr)));
                if (fr - fl > tol) return b.left->subdiff_impl(x);
                if (fl - fr > tol) return b.right->subdiff_impl(x);
                auto [l1, h1] = b.left->subdiff_impl(x);
                auto [l2, h2] = b.right->subdiff_impl(x);
                // convex min at a tie: left slope from the steeper branch,
                // right slope from the flatter one
                return {std::max(l1, l2), std::min(h1, h2)};
            } else if constexpr (std::is_same_v<T, body::Scale>) {
                auto [l, h] = b.inner->subdiff_impl(x);
                return {b.t * l, b.t * h};
            } else if constexpr (std::is_same_v<T, body::Pullback>) {
                double m = b.g.matrix()[0];
                auto [l, h] = b.inner->subdiff_impl(b.g.apply(xv)[0]);
                double a = m * l, c = m * h;
                return {std::min(a, c), std::max(a, c)};
            } else {
                double g = grad_impl(xv)[0];
                return {g, g};
            }
        },
        node_->v);
}

inline bool ConvexFunction::same_representation(const ConvexFunction& o) const {
    if (node_ == o.node_) return true;
    if (dim() != o.dim() || node_->v.index() != o.node_->v.index()) return false;
    auto eq_pieces = [](const std::vector<AffinePiece>& a, const std::vector<AffinePiece>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].b != b[i].b) return false;
            for (int k = 0; k < a[i].v.dim(); ++k)
                if (a[i].v[k] != b[i].v[k]) return false;
        }
        return true;
    };
    const auto& u = node_->v;
    const auto& w = o.node_->v;
    if (auto* q = std::get_if<body::Quadratic>(&u)) {
        const auto& r = std::get<body::Quadratic>(w);
        if (q->s != r.s) return false;
        for (int i = 0; i < dim(); ++i) {
            if (q->v[i] != r.v[i]) return false;
            for (int j = i; j < dim(); ++j)
                if (q->A(i, j) != r.A(i, j)) return false;
        }
        return true;
    }
    if (auto* m = std::get_if<body::MaxAffine>(&u)) return eq_pieces(m->pieces, std::get<body::MaxAffine>(w).pieces);
    if (auto* l = std::get_if<body::LogSumExp>(&u)) {
        const auto& r = std::get<body::LogSumExp>(w);
        return l->beta == r.beta && eq_pieces(l->pieces, r.pieces);
    }
    if (auto* p = std::get_if<body::PNorm>(&u)) {
        const auto& r = std::get<body::PNorm>(w);
        return p->p == r.p && p->c == r.c;
    }
    if (auto* s = std::get_if<body::Sum>(&u)) {
        const auto& r = std::get<body::Sum>(w);
        return s->left->same_representation(*r.left) && s->right->same_representation(*r.right);
    }
    if (auto* s = std::get_if<body::Max>(&u)) {
        const auto& r = std::get<body::Max>(w);
        return s->left->same_representation(*r.left) && s->right->same_representation(*r.right);
    }
    if (auto* s = std::get_if<body::Min>(&u)) {
        const auto& r = std::get<body::Min>(w);
        return s->left->same_representation(*r.left) && s->right->same_representation(*r.right);
    }
    if (auto* s = std::get_if<body::Scale>(&u)) {
        const auto& r = std::get<body::Scale>(w);
        return s->t == r.t && s->inner->same_representation(*r.inner);
    }
    if (auto* s = std::get_if<body::Pullback>(&u)) {
        const auto& r = std::get<body::Pullback>(w);
        if (s->g.matrix() != r.g.matrix()) return false;
        for (int i = 0; i < dim(); ++i)
            if (s->g.offset()[i] != r.g.offset()[i]) return false;
        return s->inner->same_representation(*r.inner);
    }
    const auto& bo = std::get<body::BumpOffset>(u);
    const auto& r = std::get<body::BumpOffset>(w);
    if (bo.m != r.m || bo.bump.radius != r.bump.radius || bo.bump.power != r.bump.power ||
        bo.bump.amplitude != r.bump.amplitude)
        return false;
    for (int i = 0; i < dim(); ++i)
        if (bo.bump.center[i] != r.bump.center[i]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Lattice operations
// ---------------------------------------------------------------------------

/// f + (s + <v,x>).
inline ConvexFunction add_affine(const ConvexFunction& f, const AffineFunctional& ell) {
    if (f.dim() != ell.dim()) throw dimension_mismatch("add_affine dimension");
    return ConvexFunction::sum(f, ConvexFunction::quadratic(SymMatrix::zero(f.dim()), ell.v, ell.s));
}

namespace detail {

/// Drop exactly repeated (v, b) pieces; evaluation is unchanged.
inline std::vector<AffinePiece> dedupe_pieces(std::vector<AffinePiece> pieces) {
    std::vector<AffinePiece> out;
    for (const auto& p : pieces) {
        bool dup = false;
        for (const auto& q : out) {
            bool same = p.b == q.b;
            for (int k = 0; k < p.v.dim() && same; ++k) same = p.v[k] == q.v[k];
            if (same) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(p);
    }
    return out;
}

}  // namespace detail

/// Pointwise maximum. Max-affine operands flatten to one max-affine node.
inline ConvexFunction lattice_max(const ConvexFunction& f, const ConvexFunction& h) {
    if (f.dim() != h.dim()) throw dimension_mismatch("lattice_max dimension");
    const auto* mf = f.as_max_affine();
    const auto* mh = h.as_max_affine();
    if (mf && mh) {
        std::vector<AffinePiece> pieces = mf->pieces;
        pieces.insert(pieces.end(), mh->pieces.begin(), mh->pieces.end());
        return ConvexFunction::max_affine(detail::dedupe_pieces(std::move(pieces)));
    }
    return ConvexFunction::make(f.dim(), false, body::Max{ConvexFunction::ptr(f), ConvexFunction::ptr(h)});
}

struct MinCertifyParams {
    Vec region_lo{-5.0};  // resized to the operand dimension
    Vec region_hi{5.0};
    int triples = 1200;
    double tol = 1e-9;
    std::uint64_t seed = 0x5eedULL;
};

namespace detail {

/// Exact convexification of min(f,h) for 1-d max-affine operands: slope
/// monotonicity over the induced breakpoint sequence. Returns the max-affine
/// representation of the min when convex.
inline std::optional<ConvexFunction> pl_min_1d(const body::MaxAffine& f, const body::MaxAffine& h,
                                               const ConvexFunction& ff, const ConvexFunction& hh) {
    std::vector<AffinePiece> all = f.pieces;
    all.insert(all.end(), h.pieces.begin(), h.pieces.end());
    std::vector<double> cuts;
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            double dv = all[i].v[0] - all[j].v[0];
            if (std::abs(dv) < 1e-14) continue;
            cuts.push_back((all[j].b - all[i].b) / dv);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12 * (1 + std::abs(a)); }),
               cuts.end());
    // sample points: one per open interval plus outer rays
    std::vector<double> probes;
    if (cuts.empty()) {
        probes.push_back(0.0);
    } else {
        double span = std::max(1.0, cuts.back() - cuts.front());
        probes.push_back(cuts.front() - span);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) probes.push_back(0.5 * (cuts[i] + cuts[i + 1]));
        probes.push_back(cuts.back() + span);
    }
    auto active_piece = [](const body::MaxAffine& m, double x) {
        std::size_t best = 0;
        double bv = m.pieces[0].v[0] * x + m.pieces[0].b;
        for (std::size_t i = 1; i < m.pieces.size(); ++i) {
            double v = m.pieces[i].v[0] * x + m.pieces[i].b;
            if (v > bv) {
                bv = v;
                best = i;
            }
        }
        return m.pieces[best];
    };
    std::vector<AffinePiece> mins;
    double prev_slope = -std::numeric_limits<double>::infinity();
    for (double x : probes) {
        Vec xv{x};
        AffinePiece p =
            ff.evaluate(xv) <= hh.evaluate(xv) ? active_piece(f, x) : active_piece(h, x);
        double s = p.v[0];
        if (s < prev_slope - 1e-12 * (1 + std::abs(s))) return std::nullopt;
        prev_slope = std::max(prev_slope, s);
        if (mins.empty() || mins.back().v[0] != p.v[0] || mins.back().b != p.b) mins.push_back(p);
    }
    return ConvexFunction::max_affine(std::move(mins));
}

/// Candidate exact representation of min(f,h) for max-affine operands in
/// n >= 2: the max over pieces lying below both functions, validated by
/// sampling. Returns nullopt when the candidate does not reproduce the min.
inline std::optional<ConvexFunction> pl_min_candidate(const body::MaxAffine& f, const body::MaxAffine& h,
                                                      const ConvexFunction& ff, const ConvexFunction& hh,
                                                      const MinCertifyParams& params) {
    int n = ff.dim();
    Rng rng(params.seed ^ 0xabcdefULL);
    std::vector<Vec> samples;
    for (int i = 0; i < 2000; ++i) {
        Vec x(n);
        for (int k = 0; k < n; ++k) x[k] = rng.uniform(params.region_lo[k], params.region_hi[k]);
        samples.push_back(x);
    }
    auto below = [&](const AffinePiece& p, const ConvexFunction& other) {
        for (const auto& x : samples) {
            double lv = dot(p.v, x) + p.b;
            double ov = other.evaluate(x);
            if (lv > ov + 1e-9 * (1 + std::abs(ov))) return false;
        }
        return true;
    };
    std::vector<AffinePiece> keep;
    for (const auto& p : f.pieces)
        if (below(p, hh)) keep.push_back(p);
    for (const auto& p : h.pieces)
        if (below(p, ff)) keep.push_back(p);
    keep = dedupe_pieces(std::move(keep));
    if (keep.empty()) return std::nullopt;
    ConvexFunction cand = ConvexFunction::max_affine(keep);
    for (const auto& x : samples) {
        double want = std::min(ff.evaluate(x), hh.evaluate(x));
        double got = cand.evaluate(x);
        if (std::abs(want - got) > 1e-9 * (1 + std::abs(want))) return std::nullopt;
    }
    return cand;
}

inline bool midpoint_convex_sample(const ConvexFunction& f, const ConvexFunction& h,
                                   const MinCertifyParams& params) {
    int n = f.dim();
    Rng rng(params.seed);
    auto m = [&](const Vec& x) { return std::min(f.evaluate(x), h.evaluate(x)); };
    for (int t = 0; t < params.triples; ++t) {
        Vec x(n), y(n);
        for (int k = 0; k < n; ++k) {
            x[k] = rng.uniform(params.region_lo[k], params.region_hi[k]);
            y[k] = rng.uniform(params.region_lo[k], params.region_hi[k]);
        }
        double lam = rng.uniform();
        Vec z = lam * x + (1 - lam) * y;
        double mx = m(x), my = m(y), mz = m(z);
        if (mz > lam * mx + (1 - lam) * my + params.tol * (1 + std::abs(mx) + std::abs(my))) return false;
    }
    return true;
}

}  // namespace detail

/// Pointwise minimum with a convexity certificate; nullopt means the sampled
/// certificate rejected the pair (not a valid valuation test pair).
inline std::optional<ConvexFunction> lattice_min(const ConvexFunction& f, const ConvexFunction& h,
                                                 MinCertifyParams params = {}) {
    if (f.dim() != h.dim()) throw dimension_mismatch("lattice_min dimension");
    if (params.region_lo.dim() != f.dim()) {
        Vec lo(f.dim()), hi(f.dim());
        for (int i = 0; i < f.dim(); ++i) {
            lo[i] = params.region_lo[0];
            hi[i] = params.region_hi[0];
        }
        params.region_lo = lo;
        params.region_hi = hi;
    }
    if (f.same_representation(h)) return f;
    const auto* mf = f.as_max_affine();
    const auto* mh = h.as_max_affine();
    if (mf && mh) {
        if (f.dim() == 1) return detail::pl_min_1d(*mf, *mh, f, h);
        if (auto cand = detail::pl_min_candidate(*mf, *mh, f, h, params)) return cand;
        return std::nullopt;
    }
    if (!detail::midpoint_convex_sample(f, h, params)) return std::nullopt;
    return certified_min_node(f, h);
}

}  // namespace maval
