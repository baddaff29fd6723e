#pragma once

// Shared small types: fixed-capacity vectors for n <= 3, error hierarchy,
// a deterministic RNG, and a few numeric helpers used across the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace maval {

inline constexpr int kMaxDim = 3;

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct dimension_mismatch : error {
    using error::error;
};
struct not_differentiable : error {
    using error::error;
};
struct not_c2 : error {
    using error::error;
};
struct wrong_representation : error {
    using error::error;
};
struct degenerate_subdivision : error {
    using error::error;
};
struct precondition_error : error {
    using error::error;
};

/// Point/vector in R^n, n in {1,2,3}. Value type, fixed capacity.
class Vec {
  public:
    Vec() = default;
    explicit Vec(int n) : n_(check(n)) { v_.fill(0.0); }
    Vec(std::initializer_list<double> xs) : n_(check(static_cast<int>(xs.size()))) {
        v_.fill(0.0);
        int i = 0;
        for (double x : xs) v_[i++] = x;
    }
    explicit Vec(const std::vector<double>& xs) : n_(check(static_cast<int>(xs.size()))) {
        v_.fill(0.0);
        for (int i = 0; i < n_; ++i) v_[i] = xs[i];
    }

    int dim() const { return n_; }
    double operator[](int i) const { return v_[i]; }
    double& operator[](int i) { return v_[i]; }

    std::vector<double> to_std() const { return std::vector<double>(v_.begin(), v_.begin() + n_); }

    Vec& operator+=(const Vec& o) {
        require_same_dim(o);
        for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        require_same_dim(o);
        for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double t) {
        for (int i = 0; i < n_; ++i) v_[i] *= t;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double t, Vec a) { return a *= t; }

    void require_same_dim(const Vec& o) const {
        if (n_ != o.n_) throw dimension_mismatch("vector dimension mismatch");
    }

  private:
    static int check(int n) {
        if (n < 1 || n > kMaxDim) throw dimension_mismatch("dimension must be 1, 2 or 3");
        return n;
    }
    int n_ = 1;
    std::array<double, kMaxDim> v_{};
};

inline double dot(const Vec& a, const Vec& b) {
    a.require_same_dim(b);
    double s = 0;
    for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

/// l(x) = s + <v,x>.
struct AffineFunctional {
    double s = 0.0;
    Vec v;

    int dim() const { return v.dim(); }
    double operator()(const Vec& x) const { return s + dot(v, x); }
};

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 core; doubles built from the top 53 bits so
// streams are reproducible across platforms (std:: distributions are not).
// ---------------------------------------------------------------------------

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    Vec uniform_vec(int n, double lo, double hi) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = uniform(lo, hi);
        return x;
    }
    Vec unit_vec(int n) {
        // rejection-free: normalize a Box-Muller-free gaussian substitute
        // (sum of uniforms is fine for directions at this scale)
        while (true) {
            Vec x(n);
            double r2 = 0;
            for (int i = 0; i < n; ++i) {
                x[i] = uniform(-1.0, 1.0);
                r2 += x[i] * x[i];
            }
            if (r2 > 1e-6 && r2 <= 1.0) {
                double inv = 1.0 / std::sqrt(r2);
                for (int i = 0; i < n; ++i) x[i] *= inv;
                return x;
            }
        }
    }

    Rng split() { return Rng(next_u64() ^ 0xd1b54a32d192ed03ULL); }

  private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Numeric helpers
// ---------------------------------------------------------------------------

/// Sum after sorting by value. Order-canonical: the total does not depend on
/// the order terms were produced in, which keeps symmetrized formulas exactly
/// symmetric under argument permutations.
inline double sorted_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms) s += t;
    return s;
}

inline bool approx_eq(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool approx_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// FNV-1a over a byte string, rendered as fixed-width hex. Used for the
/// "inputs-hash" field of verification reports.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

/// Thread cap for node-level parallelism. MAVAL_THREADS, default 1.
inline int max_threads() {
    if (const char* env = std::getenv("MAVAL_THREADS")) {
        int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return 1;
}

/// Index-parallel loop; results must be written by index so the outcome is
/// deterministic regardless of the thread count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    int threads = std::min<int>(max_threads(), static_cast<int>(std::thread::hardware_concurrency()));
    if (threads <= 1 || count < 64) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace maval
