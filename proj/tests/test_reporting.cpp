#include <catch2/catch_amalgamated.hpp>

#include <siegelort/report.hpp>

using namespace siegelort;
using Catch::Approx;

namespace {

const char* kDiagonalConfig = R"({
  "n": 2,
  "surface": "pair_of_pants",
  "representation": {"kind": "diagonal", "cuffs": [2.0, 2.0, 2.0]},
  "depth": 4,
  "boundary": "gamma0"
})";

} // namespace

TEST_CASE("config parsing") {
    SECTION("minimal diagonal config is valid") {
        ConfigParse p = parse_config(kDiagonalConfig);
        REQUIRE(p.ok());
        CHECK(p.config->n == 2);
        CHECK(p.config->kind == "diagonal");
        CHECK(p.config->cuffs == std::vector<double>{2.0, 2.0, 2.0});
        CHECK(p.config->depth == 4);
    }
    SECTION("product arity mismatch") {
        ConfigParse p = parse_config(R"({
            "n": 2,
            "representation": {"kind": "product", "factors": [
                {"cuffs": [2,2,2]}, {"cuffs": [2,2,2]}, {"cuffs": [2,2,2]}]}
        })");
        REQUIRE_FALSE(p.ok());
        bool arity = false;
        for (const auto& e : p.errors) arity = arity || e.code == "bad_arity";
        CHECK(arity);
    }
    SECTION("non-symplectic explicit matrix") {
        ConfigParse p = parse_config(R"({
            "n": 1,
            "representation": {"kind": "explicit", "generators": [
                [[2, 0], [0, 2]],
                [[1, 0], [0, 1]]]}
        })");
        REQUIRE_FALSE(p.ok());
        bool symp = false;
        for (const auto& e : p.errors) symp = symp || e.code == "non_symplectic";
        CHECK(symp);
    }
    SECTION("non-orthogonal twist") {
        ConfigParse p = parse_config(R"({
            "n": 2,
            "representation": {"kind": "twisted_diagonal", "cuffs": [2,2,2],
                               "twists": [[[1, 1], [0, 1]], [[1, 0], [0, 1]]]}
        })");
        REQUIRE_FALSE(p.ok());
        bool tw = false;
        for (const auto& e : p.errors) tw = tw || e.code == "non_orthogonal_twist";
        CHECK(tw);
    }
    SECTION("unknown keys are reported with their path") {
        ConfigParse p = parse_config(R"({
            "n": 1, "mystery": 3,
            "representation": {"kind": "fuchsian", "cuffs": [2,2,2]}
        })");
        REQUIRE_FALSE(p.ok());
        REQUIRE(p.errors.size() == 1);
        CHECK(p.errors[0].code == "unknown_key");
        CHECK(p.errors[0].path == "/mystery");
    }
    SECTION("explicit rank-1 config builds") {
        ConfigParse p = parse_config(R"({
            "n": 1,
            "representation": {"kind": "explicit", "generators": [
                [[7.38905609893065, 1.0], [0.0, 0.1353352832366127]],
                [[7.38905609893065, 0.0], [-21.95519622389645, 0.1353352832366127]]]}
        })");
        REQUIRE(p.ok());
        Representation rho = build_representation(*p.config);
        CHECK(rho.n == 1);
    }
}

TEST_CASE("command dispatch") {
    ConfigParse p = parse_config(kDiagonalConfig);
    REQUIRE(p.ok());
    SECTION("lengths reports nL/2") {
        ReportDocument doc = run_command("lengths", *p.config);
        CHECK(doc.doc["result"]["boundaries"][0]["ell_F"].get<double>() == Approx(2.0));
        CHECK_FALSE(doc.verdict_failed);
    }
    SECTION("width matches the closed form") {
        ReportDocument doc = run_command("width", *p.config);
        double ell_r = doc.doc["result"]["widths"][0]["ell_R"].get<double>();
        double w = doc.doc["result"]["widths"][0]["width"].get<double>();
        CHECK(w == Approx(collar_width(ell_r, 2)));
    }
    SECTION("unknown command raises") {
        CHECK_THROWS_AS(run_command("frobnicate", *p.config), domain_error);
    }
    SECTION("verify commands set the verdict") {
        ReportDocument doc = run_command("verify-a1", *p.config);
        CHECK(doc.doc["result"]["pass"].get<bool>());
        CHECK_FALSE(doc.verdict_failed);
    }
}

TEST_CASE("report emission") {
    ConfigParse p = parse_config(kDiagonalConfig);
    REQUIRE(p.ok());
    ReportDocument doc = run_command("orthospectrum", *p.config);

    SECTION("json round-trips losslessly") {
        std::string text = emit_json(doc);
        json parsed = json::parse(text);
        CHECK(parsed == doc.doc);
        CHECK(json::parse(parsed.dump(2)) == parsed);
    }
    SECTION("csv has one row per record plus a header") {
        std::string csv = emit_csv(doc, p.config->n);
        size_t rows = std::count(csv.begin(), csv.end(), '\n');
        CHECK(rows == doc.doc["result"]["records"].size() + 1);
        CHECK(csv.rfind("delta_word,theta_plus,theta_minus,ell_F,ell_R,ell_vect_1,ell_vect_2,"
                        "dF_term,lower_term,upper_term\n",
                        0) == 0);
    }
    SECTION("empty record list still emits valid output") {
        RunConfig cfg = *p.config;
        cfg.depth = 0;
        ReportDocument d0 = run_command("lengths", cfg);
        std::string csv = emit_csv(d0, cfg.n);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
        CHECK_NOTHROW(json::parse(emit_json(d0)));
    }
    SECTION("determinism: identical config gives identical bytes up to timing") {
        ReportDocument a = run_command("orthospectrum", *p.config);
        ReportDocument b = run_command("orthospectrum", *p.config);
        a.doc.erase("timing_ms");
        b.doc.erase("timing_ms");
        CHECK(a.doc.dump() == b.doc.dump());
    }
}
