#include <catch2/catch_amalgamated.hpp>

#include <maval/linalg.hpp>

using namespace maval;

namespace {

SymMatrix random_psd(Rng& rng, int n) {
    SymMatrix A(n);
    for (int r = 0; r < n; ++r) A += SymMatrix::outer(rng.uniform_vec(n, -1.0, 1.0));
    return A;
}

std::vector<double> random_rotation_rows(Rng& rng, int n) {
    if (n == 1) return {1.0};
    if (n == 2) return AffineMap::rotation2(rng.uniform(0.0, 6.28)).matrix();
    return AffineMap::rotation3(rng.unit_vec(3), rng.uniform(0.0, 6.28)).matrix();
}

}  // namespace

TEST_CASE("mixed discriminant: identity and diagonal anchors") {
    CHECK(mixed_discriminant({SymMatrix::identity(3), SymMatrix::identity(3), SymMatrix::identity(3)}) ==
          Catch::Approx(1.0).margin(1e-14));

    SymMatrix D(2);
    D.at(0, 0) = 2.0;
    D.at(1, 1) = 3.0;
    CHECK(mixed_discriminant({D, D}) == Catch::Approx(6.0).margin(1e-13));

    SymMatrix A(2), B(2);
    A.at(0, 0) = 1.0;
    B.at(1, 1) = 1.0;
    CHECK(mixed_discriminant({A, B}) == Catch::Approx(0.5).margin(1e-14));
}

TEST_CASE("mixed discriminant: multiplicity shorthand") {
    SymMatrix A(2);
    A.at(0, 0) = 1.7;
    A.at(1, 1) = -0.4;
    CHECK(mixed_discriminant_with_multiplicity(A, 1, std::nullopt, 2) ==
          Catch::Approx(0.5 * (1.7 - 0.4)).margin(1e-13));
    CHECK(mixed_discriminant_with_multiplicity(A, 0, std::nullopt, 2) == Catch::Approx(1.0));
    CHECK(mixed_discriminant_with_multiplicity(A, 2, std::nullopt, 2) == Catch::Approx(A.det()));
    CHECK_THROWS_AS(mixed_discriminant_with_multiplicity(A, 3, std::nullopt, 2), precondition_error);
    CHECK_THROWS_AS(mixed_discriminant_with_multiplicity(A, 2, SymMatrix::identity(2), 2),
                    precondition_error);
}

TEST_CASE("mixed discriminant: permutation invariance, all n") {
    Rng rng(21);
    for (int n = 1; n <= 3; ++n) {
        std::vector<SymMatrix> mats;
        for (int i = 0; i < n; ++i) mats.push_back(random_psd(rng, n));
        double base = mixed_discriminant(std::span<const SymMatrix>(mats));
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        do {
            std::vector<SymMatrix> p;
            for (int i : perm) p.push_back(mats[i]);
            CHECK(mixed_discriminant(std::span<const SymMatrix>(p)) == Catch::Approx(base).margin(1e-13));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST_CASE("mixed discriminant: multilinearity") {
    Rng rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        int n = rng.uniform_int(2, 3);
        SymMatrix A = random_psd(rng, n), Ap = random_psd(rng, n);
        std::vector<SymMatrix> rest;
        for (int i = 1; i < n; ++i) rest.push_back(random_psd(rng, n));
        double alpha = rng.uniform(-2.0, 2.0), beta = rng.uniform(-2.0, 2.0);
        SymMatrix mix = alpha * A + beta * Ap;
        auto with_first = [&](const SymMatrix& first) {
            std::vector<SymMatrix> mats{first};
            mats.insert(mats.end(), rest.begin(), rest.end());
            return mixed_discriminant(std::span<const SymMatrix>(mats));
        };
        double lhs = with_first(mix);
        double rhs = alpha * with_first(A) + beta * with_first(Ap);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-12 * (1 + std::abs(rhs))));
    }
}

TEST_CASE("mixed discriminant: rotation invariance and det consistency") {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        int n = rng.uniform_int(2, 3);
        std::vector<SymMatrix> mats;
        for (int i = 0; i < n; ++i) mats.push_back(random_psd(rng, n));
        auto R = random_rotation_rows(rng, n);
        std::vector<SymMatrix> rot;
        for (const auto& m : mats) rot.push_back(m.conjugate(R));
        double a = mixed_discriminant(std::span<const SymMatrix>(mats));
        double b = mixed_discriminant(std::span<const SymMatrix>(rot));
        CHECK(std::abs(a - b) < 1e-11 * (1 + std::abs(a)));

        std::vector<SymMatrix> diag(n, mats[0]);
        double d = mixed_discriminant(std::span<const SymMatrix>(diag));
        CHECK(std::abs(d - mats[0].det()) < 1e-12 * (1 + std::abs(d)));
    }
}

TEST_CASE("vandermonde inverse: small anchors") {
    auto v1 = vandermonde_inverse(1);
    CHECK(v1.c[0][0] == 1.0);
    CHECK(v1.c[0][1] == 0.0);
    CHECK(v1.c[1][0] == -1.0);
    CHECK(v1.c[1][1] == 1.0);

    auto v2 = vandermonde_inverse(2);
    CHECK(v2.c[2][0] == 0.5);
    CHECK(v2.c[2][1] == -1.0);
    CHECK(v2.c[2][2] == 0.5);
}

TEST_CASE("vandermonde inverse: residual") {
    // small m: the rounded doubles still satisfy V c = Id tightly
    for (int m = 1; m <= 5; ++m) {
        auto vc = vandermonde_inverse(m);
        for (int t = 0; t <= m; ++t)
            for (int j = 0; j <= m; ++j) {
                double s = 0, tk = 1;
                for (int k = 0; k <= m; ++k, tk *= t) s += tk * vc.c[k][j];
                CHECK(std::abs(s - (t == j ? 1.0 : 0.0)) < 1e-12);
            }
    }
    // m = 10: construction certifies V c == Id exactly over the rationals
    // (it throws otherwise); the double image keeps a condition-scaled residual
    auto vc = vandermonde_inverse(10);
    for (int t = 0; t <= 10; ++t)
        for (int j = 0; j <= 10; ++j) {
            double s = 0, cond = 0, tk = 1;
            for (int k = 0; k <= 10; ++k, tk *= t) {
                s += tk * vc.c[k][j];
                cond += tk * std::abs(vc.c[k][j]);
            }
            CHECK(std::abs(s - (t == j ? 1.0 : 0.0)) < 1e-12 * (1.0 + cond));
        }
    CHECK_THROWS_AS(vandermonde_inverse(0), precondition_error);
    CHECK_THROWS_AS(vandermonde_inverse(13), precondition_error);
}

TEST_CASE("jacobi eigenvalues: known spectra") {
    // diag(1, 4, 9) in a rotated frame
    Rng rng(3);
    SymMatrix D(3);
    D.at(0, 0) = 1;
    D.at(1, 1) = 4;
    D.at(2, 2) = 9;
    auto R = random_rotation_rows(rng, 3);
    SymMatrix A = D.conjugate(R);
    auto ev = jacobi_eigenvalues(A.to_rows(), 3);
    CHECK(ev[0] == Catch::Approx(1.0).margin(1e-10));
    CHECK(ev[1] == Catch::Approx(4.0).margin(1e-10));
    CHECK(ev[2] == Catch::Approx(9.0).margin(1e-10));
}

TEST_CASE("affine maps: inverse and conformal detection") {
    Rng rng(8);
    AffineMap g(2, {1.0, 2.0, 0.0, 1.5}, Vec{0.3, -0.7});
    AffineMap gi = g.inverse();
    for (int t = 0; t < 10; ++t) {
        Vec x = rng.uniform_vec(2, -3.0, 3.0);
        Vec y = gi.apply(g.apply(x));
        CHECK(norm(y - x) < 1e-12);
    }
    CHECK_FALSE(g.conformal_scale().has_value());
    AffineMap rot = AffineMap::rotation2(0.7);
    auto s = rot.conformal_scale();
    REQUIRE(s.has_value());
    CHECK(*s == Catch::Approx(1.0).margin(1e-12));
    CHECK_THROWS_AS(AffineMap(2, {1.0, 0.0, 1.0, 0.0}, Vec(2)), precondition_error);
}
