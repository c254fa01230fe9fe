#pragma once

#include <charconv>
#include <chrono>

#include <json.hpp>

#include "orthospectrum.hpp"

namespace siegelort {

inline const char* tool_version() { return "0.1.0"; }

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Run configuration. Parsing returns either a validated config or a list of
// schema errors with paths and machine-readable codes.
// ---------------------------------------------------------------------------

struct ConfigError {
    std::string path, code, message;
};

struct RunConfig {
    int n = 1;
    std::string surface = "pair_of_pants";
    std::string kind = "fuchsian";
    std::vector<double> cuffs;                      // fuchsian / diagonal / twisted_diagonal
    std::vector<std::vector<double>> factor_cuffs;  // product
    std::vector<RMat> twists;                       // twisted_diagonal, one per generator
    std::vector<RMat> generators;                   // explicit, one per generator
    int depth = 6;
    int boundary = 0;
    double gap_l = 2.0;
    double gap_eta = 0.5;
    ToleranceProfile tolerances;
    std::string out_path;
    std::string format = "json";
};

struct ConfigParse {
    std::optional<RunConfig> config;
    std::vector<ConfigError> errors;
    bool ok() const { return errors.empty() && config.has_value(); }
};

namespace detail {

inline bool read_matrix(const json& j, int rows, int cols, RMat& out) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) return false;
    out = RMat(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols) return false;
        for (int c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) return false;
            out(i, c) = j[i][c].get<double>();
        }
    }
    return true;
}

inline void check_keys(const json& j, const std::vector<std::string>& allowed,
                       const std::string& path, std::vector<ConfigError>& errs) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            errs.push_back({path + "/" + it.key(), "unknown_key", "unknown key"});
}

} // namespace detail

inline ConfigParse parse_config(const std::string& text) {
    ConfigParse res;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        res.errors.push_back({"/", "invalid_json", e.what()});
        return res;
    }
    if (!j.is_object()) {
        res.errors.push_back({"/", "invalid_json", "top level must be an object"});
        return res;
    }
    RunConfig cfg;
    auto& errs = res.errors;
    detail::check_keys(j, {"n", "surface", "representation", "depth", "boundary", "gap",
                           "tolerances", "output"},
                       "", errs);

    if (!j.contains("n") || !j["n"].is_number_integer())
        errs.push_back({"/n", "bad_rank", "n must be an integer"});
    else {
        cfg.n = j["n"].get<int>();
        if (cfg.n < 1 || cfg.n > 6) errs.push_back({"/n", "bad_rank", "n must be in 1..6"});
    }
    if (j.contains("surface")) {
        cfg.surface = j["surface"].get<std::string>();
        if (cfg.surface != "pair_of_pants")
            errs.push_back({"/surface", "bad_surface", "only pair_of_pants is supported"});
    }
    if (j.contains("depth")) {
        if (!j["depth"].is_number_integer() || j["depth"].get<int>() < 0)
            errs.push_back({"/depth", "bad_depth", "depth must be a nonnegative integer"});
        else
            cfg.depth = j["depth"].get<int>();
    }
    if (j.contains("boundary")) {
        std::string b = j["boundary"].get<std::string>();
        if (b == "gamma0")
            cfg.boundary = 0;
        else if (b == "gamma1")
            cfg.boundary = 1;
        else if (b == "gamma2")
            cfg.boundary = 2;
        else
            errs.push_back({"/boundary", "bad_boundary", "expected gamma0|gamma1|gamma2"});
    }
    if (j.contains("gap")) {
        detail::check_keys(j["gap"], {"L", "eta"}, "/gap", errs);
        if (j["gap"].contains("L")) cfg.gap_l = j["gap"]["L"].get<double>();
        if (j["gap"].contains("eta")) cfg.gap_eta = j["gap"]["eta"].get<double>();
        if (!(cfg.gap_l > 0) || !(cfg.gap_eta > 0))
            errs.push_back({"/gap", "bad_value", "gap parameters must be positive"});
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        detail::check_keys(t, {"residual_abs", "compare_rel", "pd_margin", "condition_cap"},
                           "/tolerances", errs);
        if (t.contains("residual_abs")) cfg.tolerances.residual_abs = t["residual_abs"].get<double>();
        if (t.contains("compare_rel")) cfg.tolerances.compare_rel = t["compare_rel"].get<double>();
        if (t.contains("pd_margin")) cfg.tolerances.pd_margin = t["pd_margin"].get<double>();
        if (t.contains("condition_cap")) cfg.tolerances.condition_cap = t["condition_cap"].get<double>();
        if (!(cfg.tolerances.residual_abs > 0) || !(cfg.tolerances.compare_rel > 0) ||
            !(cfg.tolerances.pd_margin > 0) || !(cfg.tolerances.condition_cap > 1))
            errs.push_back({"/tolerances", "bad_value", "tolerances must be positive"});
    }
    if (j.contains("output")) {
        detail::check_keys(j["output"], {"path", "format"}, "/output", errs);
        if (j["output"].contains("path")) cfg.out_path = j["output"]["path"].get<std::string>();
        if (j["output"].contains("format")) cfg.format = j["output"]["format"].get<std::string>();
        if (cfg.format != "json" && cfg.format != "csv")
            errs.push_back({"/output/format", "bad_format", "expected json or csv"});
    }

    if (!j.contains("representation") || !j["representation"].is_object()) {
        errs.push_back({"/representation", "missing", "representation block required"});
        return res;
    }
    const json& r = j["representation"];
    detail::check_keys(r, {"kind", "cuffs", "factors", "twists", "generators"}, "/representation",
                       errs);
    if (!r.contains("kind")) {
        errs.push_back({"/representation/kind", "missing", "kind required"});
        return res;
    }
    cfg.kind = r["kind"].get<std::string>();
    auto read_cuffs = [&](const json& src, const std::string& path, std::vector<double>& out) {
        if (!src.is_array() || src.size() != 3) {
            errs.push_back({path, "bad_arity", "expected 3 cuff lengths"});
            return;
        }
        for (const auto& v : src) {
            double x = v.is_number() ? v.get<double>() : -1.0;
            if (!(x > 0)) {
                errs.push_back({path, "bad_value", "cuff lengths must be positive"});
                return;
            }
            out.push_back(x);
        }
    };

    if (cfg.kind == "fuchsian" || cfg.kind == "diagonal" || cfg.kind == "twisted_diagonal") {
        if (!r.contains("cuffs"))
            errs.push_back({"/representation/cuffs", "missing", "cuffs required"});
        else
            read_cuffs(r["cuffs"], "/representation/cuffs", cfg.cuffs);
        if (cfg.kind == "fuchsian" && cfg.n != 1)
            errs.push_back({"/n", "bad_rank", "fuchsian requires n = 1"});
    }
    if (cfg.kind == "twisted_diagonal") {
        if (!r.contains("twists") || !r["twists"].is_array() || r["twists"].size() != 2)
            errs.push_back({"/representation/twists", "bad_arity", "expected one twist per generator"});
        else
            for (int k = 0; k < 2; ++k) {
                RMat m;
                if (!detail::read_matrix(r["twists"][k], cfg.n, cfg.n, m)) {
                    errs.push_back({"/representation/twists/" + std::to_string(k), "bad_shape",
                                    "expected an n x n matrix"});
                } else if ((m.transpose() * m - RMat::identity(cfg.n)).max_abs() >
                           cfg.tolerances.residual_abs) {
                    errs.push_back({"/representation/twists/" + std::to_string(k),
                                    "non_orthogonal_twist", "twist matrix is not orthogonal"});
                } else {
                    cfg.twists.push_back(m);
                }
            }
    }
    if (cfg.kind == "product") {
        if (!r.contains("factors") || !r["factors"].is_array() ||
            static_cast<int>(r["factors"].size()) != cfg.n)
            errs.push_back({"/representation/factors", "bad_arity",
                            "product requires exactly n factor blocks"});
        else
            for (int k = 0; k < cfg.n; ++k) {
                detail::check_keys(r["factors"][k], {"cuffs"},
                                   "/representation/factors/" + std::to_string(k), errs);
                std::vector<double> c;
                if (!r["factors"][k].contains("cuffs"))
                    errs.push_back({"/representation/factors/" + std::to_string(k), "missing",
                                    "cuffs required"});
                else
                    read_cuffs(r["factors"][k]["cuffs"],
                               "/representation/factors/" + std::to_string(k) + "/cuffs", c);
                cfg.factor_cuffs.push_back(c);
            }
    }
    if (cfg.kind == "explicit") {
        if (!r.contains("generators") || !r["generators"].is_array() || r["generators"].size() != 2)
            errs.push_back({"/representation/generators", "bad_arity",
                            "expected one matrix per generator"});
        else
            for (int k = 0; k < 2; ++k) {
                RMat m;
                if (!detail::read_matrix(r["generators"][k], 2 * cfg.n, 2 * cfg.n, m)) {
                    errs.push_back({"/representation/generators/" + std::to_string(k), "bad_shape",
                                    "expected a 2n x 2n matrix"});
                    continue;
                }
                RMat jn = symplectic_form(cfg.n);
                if ((m.transpose() * jn * m - jn).max_abs() > 1e-9 * std::max(1.0, m.max_abs())) {
                    errs.push_back({"/representation/generators/" + std::to_string(k),
                                    "non_symplectic", "matrix does not preserve the symplectic form"});
                    continue;
                }
                cfg.generators.push_back(m);
            }
    }
    if (cfg.kind != "fuchsian" && cfg.kind != "diagonal" && cfg.kind != "twisted_diagonal" &&
        cfg.kind != "product" && cfg.kind != "explicit")
        errs.push_back({"/representation/kind", "bad_kind", "unknown representation kind"});

    // parameters must be consistent with the kind
    auto forbid = [&](const char* key, const std::string& why) {
        if (r.contains(key))
            errs.push_back({std::string("/representation/") + key, "inconsistent", why});
    };
    if (cfg.kind == "product" || cfg.kind == "explicit")
        forbid("cuffs", "cuffs only apply to fuchsian or diagonal kinds");
    if (cfg.kind != "product") forbid("factors", "factors only apply to the product kind");
    if (cfg.kind != "twisted_diagonal") forbid("twists", "twists only apply to twisted_diagonal");
    if (cfg.kind != "explicit") forbid("generators", "generators only apply to the explicit kind");

    if (errs.empty()) res.config = cfg;
    return res;
}

inline Representation build_representation(const RunConfig& cfg) {
    const ToleranceProfile& tol = cfg.tolerances;
    if (cfg.kind == "fuchsian")
        return build_pants_fuchsian(cfg.cuffs[0], cfg.cuffs[1], cfg.cuffs[2], tol);
    if (cfg.kind == "diagonal" || cfg.kind == "twisted_diagonal") {
        Representation base = build_pants_fuchsian(cfg.cuffs[0], cfg.cuffs[1], cfg.cuffs[2], tol);
        return diagonal_embed(base, cfg.n, cfg.twists, tol);
    }
    if (cfg.kind == "product") {
        std::vector<Representation> factors;
        for (const auto& c : cfg.factor_cuffs)
            factors.push_back(build_pants_fuchsian(c[0], c[1], c[2], tol));
        return product_of_fuchsians(factors, tol);
    }
    // explicit
    std::vector<SymplecticElement> gens;
    for (const RMat& m : cfg.generators) gens.emplace_back(cfg.n, m, tol);
    return Representation(cfg.n, std::move(gens), SurfaceSpec::pair_of_pants(), tol);
}

// ---------------------------------------------------------------------------
// Structured report emission.
// ---------------------------------------------------------------------------

inline json config_echo(const RunConfig& cfg) {
    json rep;
    rep["kind"] = cfg.kind;
    if (!cfg.cuffs.empty()) rep["cuffs"] = cfg.cuffs;
    if (!cfg.factor_cuffs.empty()) {
        json f = json::array();
        for (const auto& c : cfg.factor_cuffs) f.push_back(json{{"cuffs", c}});
        rep["factors"] = f;
    }
    auto matrix_json = [](const RMat& m) {
        json rows = json::array();
        for (int i = 0; i < m.rows; ++i) {
            json row = json::array();
            for (int c = 0; c < m.cols; ++c) row.push_back(m(i, c));
            rows.push_back(row);
        }
        return rows;
    };
    if (!cfg.twists.empty()) {
        json t = json::array();
        for (const auto& m : cfg.twists) t.push_back(matrix_json(m));
        rep["twists"] = t;
    }
    if (!cfg.generators.empty()) {
        json g = json::array();
        for (const auto& m : cfg.generators) g.push_back(matrix_json(m));
        rep["generators"] = g;
    }
    json out;
    out["n"] = cfg.n;
    out["surface"] = cfg.surface;
    out["representation"] = rep;
    out["depth"] = cfg.depth;
    out["boundary"] = "gamma" + std::to_string(cfg.boundary);
    out["gap"] = {{"L", cfg.gap_l}, {"eta", cfg.gap_eta}};
    out["tolerances"] = {{"residual_abs", cfg.tolerances.residual_abs},
                         {"compare_rel", cfg.tolerances.compare_rel},
                         {"pd_margin", cfg.tolerances.pd_margin},
                         {"condition_cap", cfg.tolerances.condition_cap}};
    out["output"] = {{"path", cfg.out_path}, {"format", cfg.format}};
    return out;
}

inline json record_json(const OrthotubeRecord& r) {
    json o;
    o["delta_word"] = r.delta_word.str();
    o["boundary_class"] = "gamma" + std::to_string(r.boundary_class);
    o["same_boundary"] = r.same_boundary;
    o["depth"] = r.depth;
    o["theta_plus"] = r.theta_plus;
    o["theta_minus"] = r.theta_minus;
    o["ell_vect"] = r.ell_vect.x;
    o["ell_F"] = r.ell_f;
    o["ell_R"] = r.ell_r;
    o["dF_term"] = r.df_term;
    o["lower_term"] = r.lower_term;
    o["upper_term"] = r.upper_term;
    return o;
}

inline json spectrum_json(const SpectrumReport& sp) {
    json o;
    o["gamma_word"] = sp.gamma_word.str();
    if (sp.boundary_index >= 0) o["boundary"] = "gamma" + std::to_string(sp.boundary_index);
    o["depth"] = sp.depth;
    o["basepoint"] = sp.basepoint;
    o["gamma_ell_vect"] = sp.gamma_vect.x;
    o["gamma_ell_F"] = sp.gamma_ell_f;
    o["gamma_ell_R"] = sp.gamma_ell_r;
    json recs = json::array();
    for (const auto& r : sp.records) recs.push_back(record_json(r));
    o["records"] = recs;
    o["sums"] = {{"identity", sp.identity_sum}, {"lower", sp.lower_sum}, {"upper", sp.upper_sum}};
    o["identity_residual"] = sp.identity_residual;
    o["candidates"] = {{"seen", sp.candidates_seen},
                       {"rejected", sp.rejected_candidates},
                       {"degenerate_skipped", sp.degenerate_skipped}};
    return o;
}

struct ReportDocument {
    json doc;
    bool verdict_failed = false;
};

inline ReportDocument run_command(const std::string& cmd, const RunConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    ReportDocument out;
    json result;
    const std::vector<std::string> known = {"lengths",   "orthospectrum", "verify-a1", "verify-a2",
                                            "verify-b",  "double-check",  "gap",       "width"};
    if (std::find(known.begin(), known.end(), cmd) == known.end())
        throw domain_error("unknown command: " + cmd);

    if (cmd == "gap") {
        GapReport g = gap_experiment(cfg.gap_l, cfg.gap_eta, cfg.depth, cfg.n, cfg.tolerances);
        result["L"] = g.big_l;
        result["eta"] = g.eta;
        result["eps"] = g.eps;
        result["depth"] = g.depth;
        result["ell_F"] = g.ell_f;
        result["ell_R"] = g.ell_r;
        result["ell_F_expected"] = g.ell_f_expected;
        result["ell_R_expected"] = g.ell_r_expected;
        result["design_residuals"] = g.design_residuals;
        result["a1_lower_sum"] = g.a1_lower_sum;
        result["a2_lower_sum"] = g.a2_lower_sum;
        result["pass"] = g.pass;
        out.verdict_failed = !g.pass;
    } else {
        Representation rho = build_representation(cfg);
        if (cmd == "lengths") {
            json bs = json::array();
            for (int b = 0; b < rho.boundary_count(); ++b) {
                TranslationLengths t = translation_lengths(rho.peripheral_shilov(b), cfg.tolerances);
                json e;
                e["boundary"] = "gamma" + std::to_string(b);
                e["word"] = rho.peripheral_word(b).str();
                e["ell_vect"] = t.vect.x;
                e["ell_F"] = t.finsler;
                e["ell_R"] = t.riemannian;
                bs.push_back(e);
            }
            result["boundaries"] = bs;
        } else if (cmd == "orthospectrum") {
            result = spectrum_json(orthospectrum(rho, cfg.boundary, cfg.depth));
        } else if (cmd == "verify-a1" || cmd == "verify-a2") {
            Metric m = cmd == "verify-a1" ? Metric::finsler : Metric::riemannian;
            InequalityReport a = verify_inequalities(rho, m, cfg.depth);
            result["metric"] = cmd == "verify-a1" ? "finsler" : "riemannian";
            result["depth"] = a.depth;
            json bs = json::array();
            for (const auto& b : a.boundaries) {
                json e;
                e["boundary"] = "gamma" + std::to_string(b.boundary);
                e["ell"] = b.ell;
                e["record_count"] = b.record_count;
                e["lower_sum"] = b.lower_sum;
                e["upper_sum"] = b.upper_sum;
                e["lower_margin"] = b.lower_margin;
                e["lower_ok_every_depth"] = b.lower_ok_every_depth;
                e["chain_ok"] = b.chain_ok;
                e["min_upper_gap"] = b.min_upper_gap;
                e["min_lower_gap"] = b.min_lower_gap;
                e["max_upper_gap"] = b.max_upper_gap;
                if (m == Metric::riemannian) e["riemannian_route_ok"] = b.riemannian_route_ok;
                bs.push_back(e);
            }
            result["boundaries"] = bs;
            result["pass"] = a.pass;
            out.verdict_failed = !a.pass;
        } else if (cmd == "verify-b") {
            IdentityReport b = verify_identity(rho, cfg.boundary, cfg.depth);
            result["boundary"] = "gamma" + std::to_string(b.boundary);
            result["depth"] = b.depth;
            result["ell_B"] = b.ell_b;
            result["period_value"] = b.period_value;
            result["period_residual"] = b.period_residual;
            result["term_pairing_max"] = b.term_pairing_max;
            result["partial_sum"] = b.partial_sum;
            result["residual_by_depth"] = b.residual_by_depth;
            result["final_residual"] = b.final_residual;
            result["rel_residual"] = b.rel_residual;
            result["pass"] = b.pass;
            out.verdict_failed = !b.pass;
        } else if (cmd == "double-check") {
            DoubleCheckReport d = verify_double(rho, cfg.depth);
            result["relation_residual"] = d.relation_residual;
            json rs = json::array();
            for (const auto& r : d.records) {
                json e;
                e["delta"] = r.delta;
                e["ell_F_alpha"] = r.ell_f_alpha;
                e["ell_F_doubled"] = r.ell_f_doubled;
                e["length_residual"] = r.length_residual;
                e["endpoints_match"] = r.endpoints_match;
                rs.push_back(e);
            }
            result["records"] = rs;
            result["pass"] = d.pass;
            out.verdict_failed = !d.pass;
        } else if (cmd == "width") {
            json ws = json::array();
            for (int b = 0; b < rho.boundary_count(); ++b) {
                TranslationLengths t = translation_lengths(rho.peripheral_shilov(b), cfg.tolerances);
                json e;
                e["name"] = "gamma" + std::to_string(b);
                e["word"] = rho.peripheral_word(b).str();
                e["ell_R"] = t.riemannian;
                e["width"] = collar_width(t.riemannian, rho.n);
                ws.push_back(e);
            }
            // a closed-curve word alongside the boundary words
            FreeWord curve = FreeWord::parse("ab");
            TranslationLengths t = translation_lengths(rho.evaluate(curve), cfg.tolerances);
            json e;
            e["name"] = "curve";
            e["word"] = curve.str();
            e["ell_R"] = t.riemannian;
            e["width"] = collar_width(t.riemannian, rho.n);
            ws.push_back(e);
            result["widths"] = ws;
        }
    }

    auto t1 = std::chrono::steady_clock::now();
    out.doc["tool"] = "siegelort";
    out.doc["version"] = tool_version();
    out.doc["command"] = cmd;
    out.doc["config"] = config_echo(cfg);
    out.doc["result"] = result;
    out.doc["timing_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    return out;
}

// Shortest round-trip decimal for CSV cells.
inline std::string shortest_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string emit_json(const ReportDocument& doc) { return doc.doc.dump(2) + "\n"; }

// One row per orthotube record; commands without records emit the header only.
inline std::string emit_csv(const ReportDocument& doc, int n) {
    std::string out = "delta_word,theta_plus,theta_minus,ell_F,ell_R";
    for (int i = 1; i <= n; ++i) out += ",ell_vect_" + std::to_string(i);
    out += ",dF_term,lower_term,upper_term\n";
    if (!doc.doc.contains("result") || !doc.doc["result"].contains("records")) return out;
    for (const auto& r : doc.doc["result"]["records"]) {
        if (!r.contains("theta_plus")) continue;
        out += r["delta_word"].get<std::string>();
        out += "," + shortest_double(r["theta_plus"].get<double>());
        out += "," + shortest_double(r["theta_minus"].get<double>());
        out += "," + shortest_double(r["ell_F"].get<double>());
        out += "," + shortest_double(r["ell_R"].get<double>());
        for (const auto& c : r["ell_vect"]) out += "," + shortest_double(c.get<double>());
        out += "," + shortest_double(r["dF_term"].get<double>());
        out += "," + shortest_double(r["lower_term"].get<double>());
        out += "," + shortest_double(r["upper_term"].get<double>());
        out += "\n";
    }
    return out;
}

inline std::string emit_report(const ReportDocument& doc, const std::string& format, int n) {
    return format == "csv" ? emit_csv(doc, n) : emit_json(doc);
}

} // namespace siegelort
