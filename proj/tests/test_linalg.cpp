#include <catch2/catch_amalgamated.hpp>

#include <siegelort/linalg.hpp>

#include "test_helpers.hpp"

using namespace siegelort;
using namespace siegelort::testing;
using Catch::Approx;

TEST_CASE("sym_eigen on frozen examples") {
    SECTION("already diagonal") {
        RMat m(2, 2, {3, 0, 0, 1});
        SymEigen e = sym_eigen(m);
        CHECK(e.values[0] == Approx(3.0));
        CHECK(e.values[1] == Approx(1.0));
        CHECK((e.vectors - RMat::identity(2)).max_abs() < 1e-12);
    }
    SECTION("char poly (2-l)^2 - 1 = 0 gives (3, 1)") {
        RMat m(2, 2, {2, 1, 1, 2});
        SymEigen e = sym_eigen(m);
        CHECK(e.values[0] == Approx(3.0).margin(1e-12));
        CHECK(e.values[1] == Approx(1.0).margin(1e-12));
    }
    SECTION("identity") {
        for (int n : {1, 3, 6}) {
            SymEigen e = sym_eigen(RMat::identity(n));
            for (double v : e.values) CHECK(v == Approx(1.0));
        }
    }
    SECTION("symmetry violation is rejected") {
        RMat m(2, 2, {1, 2, 0, 1});
        CHECK_THROWS_AS(sym_eigen(m), domain_error);
    }
}

TEST_CASE("sym_eigen reconstruction on random symmetric matrices") {
    Rng rng(1001);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + trial % 6;
        RMat m = random_symmetric(n, rng);
        SymEigen e = sym_eigen(m);
        RMat d(n, n);
        for (int i = 0; i < n; ++i) d(i, i) = e.values[i];
        CHECK((e.vectors.transpose() * m * e.vectors - d).max_abs() < 1e-8);
        CHECK((e.vectors.transpose() * e.vectors - RMat::identity(n)).max_abs() < 1e-10);
        CHECK((m * e.vectors - e.vectors * d).max_abs() < 1e-8);
        for (int i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
    }
}

TEST_CASE("min-max principle") {
    Rng rng(1002);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + trial % 5;
        RMat m = random_symmetric(n, rng);
        SymEigen e = sym_eigen(m);
        for (int k = 0; k < 200; ++k) {
            auto v = random_unit_vector(n, rng);
            double quad = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) quad += v[i] * m(i, j) * v[j];
            CHECK(quad <= e.values.front() + 1e-12);
            CHECK(quad >= e.values.back() - 1e-12);
        }
    }
}

TEST_CASE("is_positive_definite") {
    CHECK(is_positive_definite(RMat::identity(3)));
    CHECK_FALSE(is_positive_definite(RMat(2, 2, {1, 2, 2, 1}))); // det = -3
    RMat tiny(2, 2, {1e-15, 0, 0, 1});
    CHECK_FALSE(is_positive_definite(tiny)); // below pd_margin by policy
}

TEST_CASE("sym_sqrt frozen examples") {
    RMat d(2, 2, {4, 0, 0, 9});
    CHECK((sym_sqrt(d) - RMat(2, 2, {2, 0, 0, 3})).max_abs() < 1e-12);
    CHECK((sym_sqrt(RMat::identity(4)) - RMat::identity(4)).max_abs() < 1e-12);
    // [[2,1],[1,2]]^2 = [[5,4],[4,5]] by hand.
    RMat m(2, 2, {5, 4, 4, 5});
    CHECK((sym_sqrt(m) - RMat(2, 2, {2, 1, 1, 2})).max_abs() < 1e-10);
    CHECK_THROWS_AS(sym_sqrt(RMat(2, 2, {1, 2, 2, 1})), domain_error);
}

TEST_CASE("sym_sqrt properties") {
    Rng rng(1003);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + trial % 6;
        RMat m = random_pd(n, rng);
        RMat s = sym_sqrt(m);
        CHECK((s * s - m).max_abs() < 1e-8);
        CHECK(is_positive_definite(s));
        RMat o = random_orthogonal(n, rng);
        RMat lhs = sym_sqrt(symmetrized(o * m * o.transpose()));
        RMat rhs = o * s * o.transpose();
        CHECK((lhs - rhs).max_abs() < 1e-8);
    }
}

TEST_CASE("eigenvalue bounds for products of PD matrices") {
    const auto& tol = default_tolerances();
    Rng rng(1004);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + trial % 6;
        RMat a = random_pd(n, rng), b = random_pd(n, rng);
        double max_a = sym_eigen(a).values.front();
        double min_b = sym_eigen(b).values.back();
        double max_b = sym_eigen(b).values.front();
        double max_ab = pd_pencil_eigenvalues(inverse(a), b).front();
        double slack = tol.compare_rel * std::max(1.0, max_ab);
        CHECK(max_a * max_b >= max_ab - slack);
        CHECK(max_ab >= max_a * min_b - slack);
    }
}

TEST_CASE("difference PD iff pencil eigenvalues above one") {
    const auto& tol = default_tolerances();
    Rng rng(1005);
    int used = 0;
    for (int trial = 0; trial < 400 && used < 200; ++trial) {
        int n = 1 + trial % 6;
        RMat a = random_pd(n, rng), b = random_pd(n, rng);
        double min_diff = sym_eigen(symmetrized(a - b)).values.back();
        auto pencil = pd_pencil_eigenvalues(b, a); // eigenvalues of b^{-1} a = ev(a b^{-1})
        if (std::abs(min_diff) < 10 * tol.pd_margin) continue; // boundary trial
        ++used;
        bool diff_pd = min_diff > tol.pd_margin;
        bool all_above_one = pencil.back() > 1.0 + tol.pd_margin;
        CHECK(diff_pd == all_above_one);
    }
    CHECK(used >= 200);
}

TEST_CASE("general eigenvalues frozen examples") {
    SECTION("diagonal") {
        auto ev = general_eigenvalues(RMat(2, 2, {2, 0, 0, 0.5}));
        CHECK(std::abs(ev[0] - cplx(2, 0)) < 1e-12);
        CHECK(std::abs(ev[1] - cplx(0.5, 0)) < 1e-12);
    }
    SECTION("rotation by pi/3") {
        double c = std::cos(M_PI / 3), s = std::sin(M_PI / 3);
        auto ev = general_eigenvalues(RMat(2, 2, {c, -s, s, c}));
        CHECK(std::abs(ev[0]) == Approx(1.0));
        CHECK(std::abs(ev[1]) == Approx(1.0));
        CHECK(std::abs(ev[0] - cplx(c, s)) + std::abs(ev[1] - cplx(c, -s)) < 1e-10);
    }
    SECTION("ninety degree rotation gives +-i") {
        auto ev = general_eigenvalues(RMat(2, 2, {0, 1, -1, 0}));
        CHECK(std::abs(ev[0] - cplx(0, 1)) < 1e-12);
        CHECK(std::abs(ev[1] - cplx(0, -1)) < 1e-12);
    }
}

TEST_CASE("complex Schur reconstruction and ordering") {
    Rng rng(1006);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 7;
        CMat a(n, n);
        for (auto& z : a.a) z = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
        ComplexSchur s = complex_schur(a);
        CHECK((s.q * s.t * s.q.adjoint() - a).max_abs() < 1e-10);
        CHECK((s.q.adjoint() * s.q - CMat::identity(n)).max_abs() < 1e-12);
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j) CHECK(std::abs(s.t(i, j)) == 0.0);

        double split = 1.0;
        int k = schur_order(s, [&](cplx l) { return std::abs(l) > split; });
        CHECK((s.q * s.t * s.q.adjoint() - a).max_abs() < 1e-9);
        for (int i = 0; i < n; ++i) {
            bool above = std::abs(s.t(i, i)) > split;
            if (i < k)
                CHECK(above);
            else
                CHECK_FALSE(above);
        }
    }
}

TEST_CASE("solve, determinant and inverse") {
    Rng rng(1007);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + trial % 8;
        RMat a = random_matrix(n, n, rng);
        if (std::abs(determinant(a)) < 1e-3) continue;
        RMat b = random_matrix(n, 3, rng);
        RMat x = solve(a, b);
        CHECK((a * x - b).max_abs() < 1e-9);
        CHECK((a * inverse(a) - RMat::identity(n)).max_abs() < 1e-9);
    }
    RMat rot(2, 2, {0, 1, -1, 0});
    CHECK(determinant(rot) == Approx(1.0));
}

TEST_CASE("orthonormal_columns spans and is orthonormal") {
    Rng rng(1008);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + trial % 5;
        RMat f = random_matrix(2 * n, n, rng);
        if (smallest_singular_value(f) < 1e-3) continue;
        RMat q = orthonormal_columns(f);
        CHECK((q.transpose() * q - RMat::identity(n)).max_abs() < 1e-12);
        // same column span: f = q (q^T f)
        CHECK((q * (q.transpose() * f) - f).max_abs() < 1e-10);
    }
}
