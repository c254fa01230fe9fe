#include <catch2/catch_amalgamated.hpp>

#include <set>

#include <siegelort/orthospectrum.hpp>

#include "test_helpers.hpp"

using namespace siegelort;
using namespace siegelort::testing;
using Catch::Approx;

namespace {

LagrangianFrame chart1(double v) { return LagrangianFrame::from_chart(RMat(1, 1, {v})); }

ShilovData fake_data(const LagrangianFrame& attract, const LagrangianFrame& repel) {
    ShilovData d;
    d.attract = attract;
    d.repel = repel;
    d.top_moduli = {2.0};
    return d;
}

RMat rot2(double t) {
    return RMat(2, 2, {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)});
}

} // namespace

TEST_CASE("orthotube construction") {
    SECTION("frozen n = 1 normal form") {
        // gamma pair (-1, -1/4), delta pair (0, inf): A = sqrt(1/4)
        ShilovData g = fake_data(chart1(-1), chart1(-0.25));
        ShilovData d = fake_data(LagrangianFrame::zero(1), LagrangianFrame::infinity(1));
        RTube t = orthotube_for_pair(g, d);
        bool direct = frames_equal(t.a, chart1(-0.5), 1e-9) && frames_equal(t.b, chart1(0.5), 1e-9);
        bool swapped = frames_equal(t.a, chart1(0.5), 1e-9) && frames_equal(t.b, chart1(-0.5), 1e-9);
        CHECK((direct || swapped));
    }
    SECTION("orthogonal to both peripheral tubes, independent of normalization order") {
        Rng rng(5001);
        for (int trial = 0; trial < 100; ++trial) {
            int n = 1 + trial % 3;
            auto tup = random_maximal_tuple(n, 4, rng);
            // cyclic configuration (gamma-, delta+, delta-, gamma+)
            ShilovData g = fake_data(tup[3], tup[0]);
            ShilovData d = fake_data(tup[1], tup[2]);
            RTube ortho = orthotube_for_pair(g, d);
            CHECK(orthogonality_residual(ortho, RTube(tup[3], tup[0])) < 1e-7);
            CHECK(orthogonality_residual(ortho, RTube(tup[1], tup[2])) < 1e-7);
            RTube other = orthotube_for_pair(d, g);
            bool same = (frames_equal(ortho.a, other.a, 1e-6) && frames_equal(ortho.b, other.b, 1e-6)) ||
                        (frames_equal(ortho.a, other.b, 1e-6) && frames_equal(ortho.b, other.a, 1e-6));
            CHECK(same);
        }
    }
    SECTION("coinciding peripherals are rejected") {
        ShilovData g = fake_data(chart1(-1), chart1(1));
        CHECK_THROWS_AS(orthotube_for_pair(g, g), domain_error);
    }
}

TEST_CASE("orthotube lengths") {
    SECTION("mu = 9 gives length log 2") {
        ShilovData g = fake_data(chart1(1), chart1(-1));
        ShilovData d = fake_data(chart1(-0.5), chart1(0.5));
        WeylVector l = orthotube_lengths(g, d);
        CHECK(l.x[0] == Approx(std::log(2.0)));
    }
    SECTION("diagonal embedding: all components equal the hyperbolic length") {
        Representation rho0 = build_pants_fuchsian(2, 2, 2);
        double hyp = pants_orthogeodesic_length(2, 2, 2);
        for (int n : {2, 3}) {
            Representation rho = diagonal_embed(rho0, n);
            WeylVector l = orthotube_lengths(rho.peripheral_shilov(0), rho.peripheral_shilov(1));
            for (double c : l.x) CHECK(c == Approx(hyp).margin(1e-9));
        }
        WeylVector l0 = orthotube_lengths(rho0.peripheral_shilov(0), rho0.peripheral_shilov(1));
        CHECK(l0.x[0] == Approx(hyp).margin(1e-10));
    }
    SECTION("symmetry in the two peripherals") {
        Representation rho = diagonal_embed(build_pants_fuchsian(2, 1.4, 2.7), 2,
                                            {rot2(0.5), rot2(1.2)});
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                if (i == j) continue;
                WeylVector a = orthotube_lengths(rho.peripheral_shilov(i), rho.peripheral_shilov(j));
                WeylVector b = orthotube_lengths(rho.peripheral_shilov(j), rho.peripheral_shilov(i));
                for (int c = 0; c < 2; ++c) CHECK(a.x[c] == Approx(b.x[c]).margin(1e-7));
            }
    }
    SECTION("degenerate configurations fail loudly") {
        CHECK_THROWS_AS(arccoth(1.0), domain_error);
        ShilovData g = fake_data(chart1(1), chart1(-1));
        ShilovData d = fake_data(chart1(0.5), chart1(0.5 + 1e-12));
        CHECK_THROWS_AS(orthotube_lengths(g, d), error);
    }
}

TEST_CASE("theta coordinate") {
    Representation rho = diagonal_embed(build_pants_fuchsian(2, 2, 2), 2);
    BoundaryContext ctx = make_boundary_context(rho, rho.peripheral_word(0));
    SECTION("zero at the basepoint, ellF at its translate") {
        // the basepoint is the Lagrangian mapped to Id by ctx.norm
        LagrangianFrame base = act(ctx.norm_inv, LagrangianFrame::from_chart(RMat::identity(2)));
        CHECK(theta_coordinate(ctx, base) == Approx(0.0).margin(1e-10));
        LagrangianFrame moved = act(rho.evaluate(ctx.gamma_word), base);
        CHECK(theta_coordinate(ctx, moved) == Approx(ctx.lengths.finsler).margin(1e-9));
    }
    SECTION("normalized chart e^2 Id has theta = 2") {
        LagrangianFrame l =
            act(ctx.norm_inv, LagrangianFrame::from_chart(RMat::identity(2) * std::exp(2.0)));
        CHECK(theta_coordinate(ctx, l) == Approx(2.0).margin(1e-10));
    }
    SECTION("points outside the window are rejected") {
        CHECK_THROWS_AS(theta_coordinate(ctx, ctx.gamma.attract), error);
    }
}

TEST_CASE("orthospectrum enumeration") {
    Representation rho0 = build_pants_fuchsian(2, 2, 2);
    SECTION("depth zero finds the base candidates") {
        SpectrumReport rep = orthospectrum(rho0, 0, 0);
        CHECK(rep.records.size() >= 2);
        for (const auto& r : rep.records) {
            CHECK(r.theta_plus >= 0.0);
            CHECK(r.theta_minus > r.theta_plus);
            CHECK(r.theta_minus < rep.gamma_ell_f + 1e-7);
        }
    }
    SECTION("intervals are pairwise disjoint and inside the window") {
        SpectrumReport rep = orthospectrum(rho0, 0, 6);
        for (size_t i = 1; i < rep.records.size(); ++i)
            CHECK(rep.records[i].theta_plus >= rep.records[i - 1].theta_minus - 1e-7);
        CHECK(rep.identity_sum <= rep.gamma_ell_f + 1e-7);
    }
    SECTION("depth monotonicity") {
        SpectrumReport r3 = orthospectrum(rho0, 0, 3);
        SpectrumReport r4 = orthospectrum(rho0, 0, 4);
        CHECK(r4.records.size() >= r3.records.size());
        std::set<std::pair<long long, long long>> keys4;
        for (const auto& r : r4.records)
            keys4.insert({std::llround(r.theta_plus * 1e6), std::llround(r.theta_minus * 1e6)});
        for (const auto& r : r3.records)
            CHECK(keys4.count({std::llround(r.theta_plus * 1e6), std::llround(r.theta_minus * 1e6)}) ==
                  1);
    }
    SECTION("partial sums never exceed ellF at any depth") {
        for (const Representation& rho :
             {rho0, diagonal_embed(rho0, 2, {rot2(M_PI / 3), RMat::identity(2)})}) {
            SpectrumReport rep = orthospectrum(rho, 0, 6);
            auto sums = cumulative_by_depth(rep, &OrthotubeRecord::df_term);
            for (size_t d = 1; d < sums.size(); ++d) {
                CHECK(sums[d] >= sums[d - 1] - 1e-12);
                CHECK(sums[d] <= rep.gamma_ell_f + 1e-7);
            }
        }
    }
    SECTION("records carry the term chain") {
        Representation tw = diagonal_embed(rho0, 2, {rot2(M_PI / 3), RMat::identity(2)});
        SpectrumReport rep = orthospectrum(tw, 0, 6);
        for (const auto& r : rep.records) {
            CHECK(r.upper_term >= r.df_term - 1e-9);
            CHECK(r.df_term >= r.lower_term - 1e-9);
        }
    }
    SECTION("rank one: the chain collapses to equality") {
        SpectrumReport rep = orthospectrum(rho0, 0, 6);
        for (const auto& r : rep.records) {
            CHECK(r.upper_term == Approx(r.df_term).margin(1e-10));
            CHECK(r.lower_term == Approx(r.df_term).margin(1e-10));
        }
    }
}

TEST_CASE("rank-1 terms match the hyperbolic plane closed form") {
    Representation rho0 = build_pants_fuchsian(2, 2, 2);
    // conjugate the whole picture away from infinity for the oracle
    SymplecticElement move(1, RMat(2, 2, {1.0, 0.17, 0.31, 1.0527}));
    SpectrumReport rep = orthospectrum(rho0, 0, 5);
    auto [g_att, g_rep] = mobius_fixed_points((move * rho0.peripheral_image(0) * move.inverse()).g);
    for (const auto& r : rep.records) {
        SymplecticElement d = move * rho0.evaluate(r.delta_word) * move.inverse();
        auto [d_att, d_rep] = mobius_fixed_points(d.g);
        if (std::max({std::abs(g_att), std::abs(g_rep), std::abs(d_att), std::abs(d_rep)}) > 1e200)
            continue;
        double hyp = h2_geodesic_distance(g_att, g_rep, d_att, d_rep);
        CHECK(r.df_term == Approx(log_coth(hyp / 2)).margin(1e-7));
        CHECK(r.ell_vect.x[0] == Approx(hyp).margin(1e-7));
    }
}

TEST_CASE("conjugation equivariance of the spectrum") {
    Representation rho = diagonal_embed(build_pants_fuchsian(2, 2, 2), 2);
    FreeWord w = FreeWord::parse("a");
    FreeWord conj = w * rho.peripheral_word(0) * w.inverse();
    SpectrumReport base = orthospectrum(rho, 0, 4);
    SpectrumReport moved = orthospectrum(rho, conj, 6);
    std::multiset<long long> moved_lengths;
    for (const auto& r : moved.records) moved_lengths.insert(std::llround(r.ell_f * 1e7));
    for (const auto& r : base.records) {
        auto it = moved_lengths.find(std::llround(r.ell_f * 1e7));
        bool found = it != moved_lengths.end();
        if (!found) { // allow one ulp of rounding in the key
            for (long long d : {-1LL, 1LL})
                found = found || moved_lengths.count(std::llround(r.ell_f * 1e7) + d);
        }
        CHECK(found);
        if (it != moved_lengths.end()) moved_lengths.erase(it);
    }
}

TEST_CASE("global conjugation invariance of the spectrum") {
    Rng rng(5099);
    Representation rho = diagonal_embed(build_pants_fuchsian(2, 1.7, 2.4), 2);
    SymplecticElement h = random_symplectic(2, rng, 5);
    std::vector<SymplecticElement> conj_imgs;
    for (const auto& g : rho.images) conj_imgs.push_back(h * g * h.inverse());
    Representation moved(2, conj_imgs, SurfaceSpec::pair_of_pants());
    SpectrumReport a = orthospectrum(rho, 0, 4);
    SpectrumReport b = orthospectrum(moved, 0, 4);
    REQUIRE(a.records.size() == b.records.size());
    CHECK(a.gamma_ell_f == Approx(b.gamma_ell_f).margin(1e-9));
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].theta_plus == Approx(b.records[i].theta_plus).margin(1e-7));
        CHECK(a.records[i].ell_f == Approx(b.records[i].ell_f).margin(1e-7));
        CHECK(a.records[i].df_term == Approx(b.records[i].df_term).margin(1e-8));
    }
}

TEST_CASE("classical Basmajian partial sums at rank one") {
    Representation rho0 = build_pants_fuchsian(2, 2, 2);
    SpectrumReport rep = orthospectrum(rho0, 0, 8);
    auto sums = cumulative_by_depth(rep, &OrthotubeRecord::df_term);
    // doubled Finsler sums approach the hyperbolic boundary length 2
    for (size_t d = 1; d < sums.size(); ++d) CHECK(2 * sums[d] <= 2.0 + 1e-7);
    CHECK(2 * sums.back() > 2.0 * 0.9);
    CHECK(rep.gamma_ell_f == Approx(1.0).margin(1e-10));
}

TEST_CASE("inequality verifier") {
    Representation rho0 = build_pants_fuchsian(2, 2, 2);
    SECTION("untwisted diagonal: equality margins are tiny") {
        Representation rho = diagonal_embed(rho0, 2);
        InequalityReport a = verify_inequalities(rho, Metric::finsler, 5);
        CHECK(a.pass);
        for (const auto& b : a.boundaries) {
            CHECK(b.chain_ok);
            CHECK(b.max_upper_gap < 1e-6);
        }
    }
    SECTION("a compact character twist stays in the equality class") {
        // diag(X, X) twists fix every Lagrangian of the form v (x) R^n, so the
        // boundary data and all cross-ratios match the untwisted embedding
        Representation rho = diagonal_embed(rho0, 2, {rot2(M_PI / 3), RMat::identity(2)});
        InequalityReport a = verify_inequalities(rho, Metric::finsler, 5);
        CHECK(a.pass);
        for (const auto& b : a.boundaries) CHECK(b.max_upper_gap < 1e-6);
    }
    SECTION("product of distinct Fuchsians: strict gaps appear") {
        Representation other = build_pants_fuchsian(1.6, 2.9, 1.1);
        Representation rho = product_of_fuchsians({rho0, other});
        InequalityReport a = verify_inequalities(rho, Metric::finsler, 5);
        CHECK(a.pass);
        double max_gap = 0;
        for (const auto& b : a.boundaries) max_gap = std::max(max_gap, b.max_upper_gap);
        CHECK(max_gap > 1e-3);
        InequalityReport a2 = verify_inequalities(rho, Metric::riemannian, 5);
        CHECK(a2.pass);
    }
    SECTION("riemannian variant") {
        Representation rho = diagonal_embed(rho0, 2, {rot2(0.4), rot2(0.9)});
        InequalityReport a = verify_inequalities(rho, Metric::riemannian, 5);
        CHECK(a.pass);
        for (const auto& b : a.boundaries) {
            CHECK(b.riemannian_route_ok);
            CHECK(b.lower_ok_every_depth);
        }
    }
}

TEST_CASE("cross-ratio identity verifier") {
    Representation rho = diagonal_embed(build_pants_fuchsian(2, 2, 2), 2);
    IdentityReport b = verify_identity(rho, 0, 6);
    CHECK(b.pass);
    CHECK(b.ell_b == Approx(2 * 2.0 / 2 * 2).margin(1e-9)); // 2 ellF = 2 * (n L / 2) = 4
    CHECK(b.period_residual < 1e-8);
    CHECK(b.term_pairing_max < 1e-8);
    for (size_t d = 1; d < b.residual_by_depth.size(); ++d)
        CHECK(b.residual_by_depth[d] <= b.residual_by_depth[d - 1] + 1e-12);
    CHECK(b.final_residual >= -1e-9);
}

TEST_CASE("double consistency on the shortest records") {
    Representation rho0 = build_pants_fuchsian(2, 2, 2);
    for (int n : {1, 2}) {
        Representation rho = n == 1 ? rho0 : diagonal_embed(rho0, 2);
        DoubleCheckReport rep = verify_double(rho, 4, 6);
        CHECK(rep.pass);
        CHECK(rep.relation_residual < 1e-7);
        for (const auto& r : rep.records) {
            CHECK(r.length_residual < 1e-7 * (1 + r.ell_f_doubled));
            CHECK(r.endpoints_match);
        }
    }
}

TEST_CASE("gap experiment") {
    SECTION("unsupported rank") {
        CHECK_THROWS_AS(gap_experiment(2.0, 0.5, 4, 1), domain_error);
        CHECK_THROWS_AS(gap_experiment(2.0, 0.5, 4, 3), domain_error);
    }
    SECTION("n = 2 smoke run") {
        GapReport rep = gap_experiment(2.0, 0.5, 6);
        CHECK(rep.eps == Approx(0.125));
        CHECK(rep.ell_f == Approx(2.0).margin(1e-6));
        CHECK(rep.ell_r == Approx(2 * std::sqrt(2.0)).margin(1e-6));
        for (double d : rep.design_residuals) CHECK(d < 1e-7);
        CHECK(rep.a1_lower_sum < 0.5);
        CHECK(rep.a2_lower_sum < 0.5);
        CHECK(rep.pass);
    }
}
