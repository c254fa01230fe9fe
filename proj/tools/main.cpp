// Command line front end: configuration in, structured verification report
// out. Exit status 0 = all verdicts pass, 2 = a verification verdict failed,
// 1 = configuration or runtime error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <siegelort/report.hpp>

using namespace siegelort;

int main(int argc, char** argv) {
    CLI::App app{"Siegel-space orthospectrum toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, format, boundary;
    int depth = -1;

    const std::vector<std::string> commands = {"lengths",   "orthospectrum", "verify-a1",
                                               "verify-a2", "verify-b",      "double-check",
                                               "gap",       "width"};
    const std::map<std::string, std::string> blurb = {
        {"lengths", "translation lengths of the boundary components"},
        {"orthospectrum", "enumerate orthotubes and Basmajian partial sums"},
        {"verify-a1", "Finsler Basmajian-type inequalities"},
        {"verify-a2", "Riemannian Basmajian-type inequalities"},
        {"verify-b", "cross-ratio identity partial sums"},
        {"double-check", "holomorphic double consistency"},
        {"gap", "arbitrarily-small right-hand-side experiment"},
        {"width", "collar widths from Riemannian lengths"}};
    for (const std::string& c : commands) {
        CLI::App* sub = app.add_subcommand(c, blurb.at(c));
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--depth", depth, "enumeration depth override");
        sub->add_option("--boundary", boundary, "boundary selector: gamma0|gamma1|gamma2");
        sub->add_option("--out", out_path, "output path (default stdout)");
        sub->add_option("--format", format, "json|csv");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage/config errors map to 1, --help to 0
    }
    std::string cmd = app.get_subcommands().front()->get_name();

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open config file " << config_path << "\n";
        return 1;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    ConfigParse parsed = parse_config(buffer.str());
    if (!parsed.ok()) {
        json errs = json::array();
        for (const auto& e : parsed.errors)
            errs.push_back({{"path", e.path}, {"code", e.code}, {"message", e.message}});
        std::cerr << json{{"config_errors", errs}}.dump(2) << "\n";
        return 1;
    }
    RunConfig cfg = *parsed.config;
    if (depth >= 0) cfg.depth = depth;
    if (!out_path.empty()) cfg.out_path = out_path;
    if (!format.empty()) {
        if (format != "json" && format != "csv") {
            std::cerr << "error: bad format " << format << "\n";
            return 1;
        }
        cfg.format = format;
    }
    if (!boundary.empty()) {
        if (boundary == "gamma0")
            cfg.boundary = 0;
        else if (boundary == "gamma1")
            cfg.boundary = 1;
        else if (boundary == "gamma2")
            cfg.boundary = 2;
        else {
            std::cerr << "error: bad boundary " << boundary << "\n";
            return 1;
        }
    }

    try {
        ReportDocument doc = run_command(cmd, cfg);
        std::string payload = emit_report(doc, cfg.format, cfg.n);
        if (cfg.out_path.empty()) {
            std::cout << payload;
        } else {
            std::ofstream out(cfg.out_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write " << cfg.out_path << "\n";
                return 1;
            }
            out << payload;
        }
        return doc.verdict_failed ? 2 : 0;
    } catch (const error& e) {
        std::cerr << "error (" << cmd << ", boundary gamma" << cfg.boundary << ", depth "
                  << cfg.depth << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
