#pragma once

// Small-dimension linear algebra: symmetric matrices for n <= 3, mixed
// discriminants via inclusion-exclusion, exact inverse Vandermonde systems,
// affine maps, and a dense Jacobi eigensolver for the sampling-rank checks.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "maval/common.hpp"

namespace maval {

/// Symmetric n x n matrix, n in {1,2,3}. Upper triangle stored row-major.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(check(n)) { a_.fill(0.0); }

    static SymMatrix identity(int n) {
        SymMatrix m(n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
    static SymMatrix zero(int n) { return SymMatrix(n); }
    /// v v^T
    static SymMatrix outer(const Vec& v) {
        SymMatrix m(v.dim());
        for (int i = 0; i < v.dim(); ++i)
            for (int j = i; j < v.dim(); ++j) m.at(i, j) = v[i] * v[j];
        return m;
    }
    /// From a full row-major n*n array; symmetry enforced by averaging.
    static SymMatrix from_rows(int n, const std::vector<double>& rows) {
        if (static_cast<int>(rows.size()) != n * n) throw dimension_mismatch("matrix entries size");
        SymMatrix m(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) m.at(i, j) = 0.5 * (rows[i * n + j] + rows[j * n + i]);
        return m;
    }

    int dim() const { return n_; }
    double operator()(int i, int j) const { return a_[idx(i, j)]; }
    double& at(int i, int j) { return a_[idx(i, j)]; }

    SymMatrix& operator+=(const SymMatrix& o) {
        require_same_dim(o);
        for (int k = 0; k < size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    SymMatrix& operator*=(double t) {
        for (int k = 0; k < size(); ++k) a_[k] *= t;
        return *this;
    }
    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator*(double t, SymMatrix a) { return a *= t; }

    Vec apply(const Vec& x) const {
        if (x.dim() != n_) throw dimension_mismatch("matrix/vector dimension");
        Vec y(n_);
        for (int i = 0; i < n_; ++i) {
            double s = 0;
            for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
    double quad_form(const Vec& x) const { return dot(x, apply(x)); }

    double trace() const {
        double s = 0;
        for (int i = 0; i < n_; ++i) s += (*this)(i, i);
        return s;
    }

    double det() const {
        const SymMatrix& m = *this;
        switch (n_) {
            case 1:
                return m(0, 0);
            case 2:
                return m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
            default:
                return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(1, 2)) -
                       m(0, 1) * (m(0, 1) * m(2, 2) - m(1, 2) * m(0, 2)) +
                       m(0, 2) * (m(0, 1) * m(1, 2) - m(1, 1) * m(0, 2));
        }
    }

    /// det of the submatrix with the given row/column index sets (k <= n).
    double minor(std::span<const int> rows, std::span<const int> cols) const {
        int k = static_cast<int>(rows.size());
        if (k != static_cast<int>(cols.size())) throw dimension_mismatch("minor index sets");
        if (k == 0) return 1.0;
        if (k == 1) return (*this)(rows[0], cols[0]);
        if (k == 2)
            return (*this)(rows[0], cols[0]) * (*this)(rows[1], cols[1]) -
                   (*this)(rows[0], cols[1]) * (*this)(rows[1], cols[0]);
        const SymMatrix& m = *this;
        auto e = [&](int i, int j) { return m(rows[i], cols[j]); };
        return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
               e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
               e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    }

    /// R^T A R for a (not necessarily orthogonal) row-major n x n matrix R.
    SymMatrix conjugate(const std::vector<double>& R) const {
        if (static_cast<int>(R.size()) != n_ * n_) throw dimension_mismatch("conjugation matrix size");
        SymMatrix out(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) {
                double s = 0;
                for (int p = 0; p < n_; ++p)
                    for (int q = 0; q < n_; ++q) s += R[p * n_ + i] * (*this)(p, q) * R[q * n_ + j];
                out.at(i, j) = s;
            }
        return out;
    }

    std::vector<double> to_rows() const {
        std::vector<double> r(n_ * n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r[i * n_ + j] = (*this)(i, j);
        return r;
    }

    void require_same_dim(const SymMatrix& o) const {
        if (n_ != o.n_) throw dimension_mismatch("matrix dimension mismatch");
    }

  private:
    static int check(int n) {
        if (n < 1 || n > kMaxDim) throw dimension_mismatch("matrix dimension must be 1, 2 or 3");
        return n;
    }
    int idx(int i, int j) const {
        if (i > j) std::swap(i, j);
        // row-major upper triangle offsets for n<=3
        return i * n_ - i * (i - 1) / 2 + (j - i);
    }
    int size() const { return n_ * (n_ + 1) / 2; }
    int n_ = 1;
    std::array<double, 6> a_{};
};

// ---------------------------------------------------------------------------
// Jacobi eigenvalues (dense symmetric, used for small Gram matrices)
// ---------------------------------------------------------------------------

/// Eigenvalues of a dense symmetric matrix (row-major, size m <= ~64),
/// ascending. Cyclic Jacobi; plenty for the rank estimates here.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int m) {
    auto at = [&](int i, int j) -> double& { return a[i * m + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) {
                double apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (at(q, q) - at(p, p)) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < m; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < m; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(m);
    for (int i = 0; i < m; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double min_eigenvalue(const SymMatrix& m) {
    return jacobi_eigenvalues(m.to_rows(), m.dim()).front();
}

// ---------------------------------------------------------------------------
// Mixed discriminants
// ---------------------------------------------------------------------------

/// D(A_1,...,A_n) = (1/n!) sum_{S subset [n]} (-1)^{n-|S|} det(sum_{i in S} A_i).
/// Symmetric and multilinear; D(A,...,A) = det A.
inline double mixed_discriminant(std::span<const SymMatrix> mats) {
    int n = static_cast<int>(mats.size());
    if (n < 1 || n > kMaxDim) throw dimension_mismatch("mixed discriminant needs n in {1,2,3} matrices");
    for (const auto& m : mats)
        if (m.dim() != n) throw dimension_mismatch("mixed discriminant: matrix dim must equal count");
    double fact = (n == 1) ? 1.0 : (n == 2) ? 2.0 : 6.0;
    double acc = 0;
    for (int mask = 1; mask < (1 << n); ++mask) {
        SymMatrix s(n);
        int bits = 0;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) {
                s += mats[i];
                ++bits;
            }
        double sign = ((n - bits) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * s.det();
    }
    return acc / fact;
}

inline double mixed_discriminant(std::initializer_list<SymMatrix> mats) {
    std::vector<SymMatrix> v(mats);
    return mixed_discriminant(std::span<const SymMatrix>(v));
}

/// D(A[c], extra[1 if present], Id[rest]) in dimension n.
inline double mixed_discriminant_with_multiplicity(const SymMatrix& A, int c,
                                                   const std::optional<SymMatrix>& extra, int n) {
    if (n < 1 || n > kMaxDim) throw dimension_mismatch("dimension must be 1, 2 or 3");
    if (A.dim() != n) throw dimension_mismatch("matrix dimension must equal n");
    int used = c + (extra ? 1 : 0);
    if (c < 0 || used > n) throw precondition_error("multiplicity out of range");
    if (extra && extra->dim() != n) throw dimension_mismatch("extra matrix dimension must equal n");
    std::vector<SymMatrix> mats;
    mats.reserve(n);
    for (int i = 0; i < c; ++i) mats.push_back(A);
    if (extra) mats.push_back(*extra);
    for (int i = used; i < n; ++i) mats.push_back(SymMatrix::identity(n));
    return mixed_discriminant(std::span<const SymMatrix>(mats));
}

// ---------------------------------------------------------------------------
// Inverse Vandermonde over integer nodes 0..m
// ---------------------------------------------------------------------------

/// c = V^{-1} for V[t][k] = t^k, t,k in 0..m. Rows of c recover polynomial
/// coefficients from values at the integer nodes: coeff_k = sum_j c[k][j] p(j).
struct VandermondeCoeffs {
    int m = 0;
    std::vector<std::vector<double>> c;  // (m+1) x (m+1)
};

namespace detail {
// Exact column j of the inverse as integer numerators over a common
// denominator: L_j(t) = prod_{i != j} (t - i)/(j - i). Numerator coefficients
// are bounded by (m+1)! <= 13!, well inside int64 for m <= 12.
inline void lagrange_column(int m, int j, std::vector<std::int64_t>& num, std::int64_t& den) {
    num.assign(m + 2, 0);
    num[0] = 1;
    int deg = 0;
    den = 1;
    for (int i = 0; i <= m; ++i) {
        if (i == j) continue;
        den *= static_cast<std::int64_t>(j - i);
        for (int k = deg + 1; k >= 1; --k) num[k] = num[k - 1] + num[k] * (-i);
        num[0] *= -i;
        ++deg;
    }
}
}  // namespace detail

/// Exact rational inversion, rounded to double at the end. Construction
/// self-verifies V * c == Id over the integers (see below) and throws on
/// any mismatch, so a returned object is certified exact before rounding.
inline VandermondeCoeffs vandermonde_inverse(int m) {
    if (m < 1 || m > 12) throw precondition_error("vandermonde_inverse supports 1 <= m <= 12");
    VandermondeCoeffs out;
    out.m = m;
    out.c.assign(m + 1, std::vector<double>(m + 1, 0.0));
    std::vector<std::vector<std::int64_t>> nums(m + 1);
    std::vector<std::int64_t> dens(m + 1);
    for (int j = 0; j <= m; ++j) {
        detail::lagrange_column(m, j, nums[j], dens[j]);
        for (int k = 0; k <= m; ++k)
            out.c[k][j] = static_cast<double>(nums[j][k]) / static_cast<double>(dens[j]);
    }
    // exact check: sum_k t^k num_j[k] == den_j * delta_{tj}; products stay
    // below ~1e23 for m = 12, within __int128.
    for (int t = 0; t <= m; ++t) {
        for (int j = 0; j <= m; ++j) {
            __int128 s = 0, tk = 1;
            for (int k = 0; k <= m; ++k) {
                s += tk * static_cast<__int128>(nums[j][k]);
                tk *= t;
            }
            __int128 want = (t == j) ? static_cast<__int128>(dens[j]) : 0;
            if (s != want) throw error("vandermonde_inverse: exact residual check failed");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Affine maps g(x) = M x + w
// ---------------------------------------------------------------------------

class AffineMap {
  public:
    AffineMap() = default;
    AffineMap(int n, std::vector<double> M_rows, Vec w) : n_(n), m_(std::move(M_rows)), w_(w) {
        if (static_cast<int>(m_.size()) != n_ * n_ || w_.dim() != n_)
            throw dimension_mismatch("affine map shape");
        if (std::abs(det()) < 1e-14) throw precondition_error("affine map must be invertible");
    }
    static AffineMap identity(int n) {
        std::vector<double> M(n * n, 0.0);
        for (int i = 0; i < n; ++i) M[i * n + i] = 1.0;
        return AffineMap(n, std::move(M), Vec(n));
    }
    static AffineMap translation(const Vec& w) {
        AffineMap g = identity(w.dim());
        g.w_ = w;
        return g;
    }
    /// Rotation by angle (n=2) about the origin.
    static AffineMap rotation2(double angle) {
        double c = std::cos(angle), s = std::sin(angle);
        return AffineMap(2, {c, -s, s, c}, Vec(2));
    }
    /// Rotation about a unit axis by angle (n=3), Rodrigues form.
    static AffineMap rotation3(const Vec& axis, double angle) {
        double c = std::cos(angle), s = std::sin(angle), t = 1 - c;
        double x = axis[0], y = axis[1], z = axis[2];
        return AffineMap(3,
                         {t * x * x + c, t * x * y - s * z, t * x * z + s * y,
                          t * x * y + s * z, t * y * y + c, t * y * z - s * x,
                          t * x * z - s * y, t * y * z + s * x, t * z * z + c},
                         Vec(3));
    }

    int dim() const { return n_; }
    const std::vector<double>& matrix() const { return m_; }
    const Vec& offset() const { return w_; }
    Vec& offset() { return w_; }

    Vec apply(const Vec& x) const {
        if (x.dim() != n_) throw dimension_mismatch("affine map apply");
        Vec y(n_);
        for (int i = 0; i < n_; ++i) {
            double s = w_[i];
            for (int j = 0; j < n_; ++j) s += m_[i * n_ + j] * x[j];
            y[i] = s;
        }
        return y;
    }
    /// M^T y (the transpose action, used by the chain rule).
    Vec apply_transpose(const Vec& y) const {
        Vec x(n_);
        for (int j = 0; j < n_; ++j) {
            double s = 0;
            for (int i = 0; i < n_; ++i) s += m_[i * n_ + j] * y[i];
            x[j] = s;
        }
        return x;
    }

    double det() const {
        switch (n_) {
            case 1:
                return m_[0];
            case 2:
                return m_[0] * m_[3] - m_[1] * m_[2];
            default:
                return m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) - m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
                       m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
        }
    }

    AffineMap inverse() const {
        double d = det();
        std::vector<double> inv(n_ * n_);
        switch (n_) {
            case 1:
                inv[0] = 1.0 / d;
                break;
            case 2:
                inv = {m_[3] / d, -m_[1] / d, -m_[2] / d, m_[0] / d};
                break;
            default: {
                auto cof = [&](int r0, int r1, int c0, int c1) {
                    return m_[r0 * 3 + c0] * m_[r1 * 3 + c1] - m_[r0 * 3 + c1] * m_[r1 * 3 + c0];
                };
                inv = {cof(1, 2, 1, 2) / d, -cof(0, 2, 1, 2) / d, cof(0, 1, 1, 2) / d,
                       -cof(1, 2, 0, 2) / d, cof(0, 2, 0, 2) / d, -cof(0, 1, 0, 2) / d,
                       cof(1, 2, 0, 1) / d, -cof(0, 2, 0, 1) / d, cof(0, 1, 0, 1) / d};
                break;
            }
        }
        AffineMap g;
        g.n_ = n_;
        g.m_ = std::move(inv);
        Vec w(n_);
        for (int i = 0; i < n_; ++i) {
            double s = 0;
            for (int j = 0; j < n_; ++j) s += g.m_[i * n_ + j] * w_[j];
            w[i] = -s;
        }
        g.w_ = w;
        return g;
    }

    bool is_translation() const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (std::abs(m_[i * n_ + j] - (i == j ? 1.0 : 0.0)) > 1e-14) return false;
        return true;
    }
    bool is_diagonal() const {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (i != j && std::abs(m_[i * n_ + j]) > 1e-14) return false;
        return true;
    }
    /// s with M^T M = s^2 Id (rotations and uniform scalings), if any.
    std::optional<double> conformal_scale() const {
        std::vector<double> g(n_ * n_, 0.0);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k) g[i * n_ + j] += m_[k * n_ + i] * m_[k * n_ + j];
        double s2 = g[0];
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double want = (i == j) ? s2 : 0.0;
                if (std::abs(g[i * n_ + j] - want) > 1e-10 * std::max(1.0, s2)) return std::nullopt;
            }
        return std::sqrt(s2);
    }

  private:
    int n_ = 1;
    std::vector<double> m_{1.0};
    Vec w_{0.0};
};

}  // namespace maval
