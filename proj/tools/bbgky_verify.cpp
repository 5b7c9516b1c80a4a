// bbgky_verify - runs verification suites on a scenario and writes a
// deterministic report plus CSV data.
//
// Exit codes: 0 all suites pass, 1 a suite failed, 2 parse error,
// 3 validation error. Errors are printed to stderr as one JSON line.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbgky/suites.hpp"

namespace {

enum ExitCode { kPass = 0, kSuiteFailed = 1, kParseError = 2, kValidationError = 3 };

int diagnose(const char* kind, const std::string& path, const std::string& message, int code) {
    bbgky::Json j{{"error", kind}, {"path", path}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << "\n";
    return code;
}

bbgky::Scenario load_scenario(const std::string& file) {
    if (file.empty()) return bbgky::parse_scenario(bbgky::builtin_cm1_scenario());
    std::string text;
    try {
        text = bbgky::read_text_file(file);
    } catch (const std::exception& ex) {
        throw bbgky::ParseError("$", ex.what());
    }
    return bbgky::parse_scenario(text);
}

std::string output_dir(const std::string& flag, const bbgky::Scenario& sc) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("BBGKY_OUTPUT_DIR"); env && *env) return env;
    return sc.output_dir.empty() ? "bbgky_output" : sc.output_dir;
}

int execute(const bbgky::Scenario& sc, const std::vector<std::string>& only, const std::string& out_flag) {
    const auto res = bbgky::run_scenario(sc, only);
    const std::string dir = output_dir(out_flag, sc);
    bbgky::write_outputs(dir, sc, res);
    for (const auto& s : res.suites) {
        std::cout << (s.pass ? "PASS " : "FAIL ") << s.name << "\n";
        for (const auto& f : s.failures) std::cout << "  " << f << "\n";
    }
    std::cout << "report: " << dir << "/report.json\n";
    return res.pass() ? kPass : kSuiteFailed;
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    for (std::size_t i = 0; std::getline(ss, item, ','); ++i) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw bbgky::ParseError("--values[" + std::to_string(i) + "]", "not a number: '" + item + "'");
        }
    }
    if (out.empty()) throw bbgky::ParseError("--values", "empty list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical verification of quantum BBGKY-type hierarchies and kinetic equations"};
    app.require_subcommand(1);
    app.set_version_flag("--version", bbgky::kToolVersion);

    std::string out_flag;
    app.add_option("--output-dir", out_flag, "Output directory (overrides BBGKY_OUTPUT_DIR and the scenario)");

    std::string scenario_file;
    auto* run = app.add_subcommand("run", "Run every suite listed in a scenario file");
    run->add_option("scenario", scenario_file, "Scenario JSON file")->required();
    run->add_option("--output-dir", out_flag, "Output directory");

    std::string suite;
    std::string verify_scenario;
    auto* verify = app.add_subcommand("verify", "Run one suite (default scenario: built-in CM1)");
    verify->add_option("--suite", suite, "Suite name")->required()->check(CLI::IsMember(bbgky::suite_names()));
    verify->add_option("--scenario", verify_scenario, "Scenario JSON file");
    verify->add_option("--output-dir", out_flag, "Output directory");

    std::string param, values;
    std::string sweep_scenario;
    auto* sweep = app.add_subcommand("sweep", "Mean-field and chaos sweeps over a parameter list");
    sweep->add_option("--param", param, "Swept parameter")->required()->check(CLI::IsMember({"epsilon"}));
    sweep->add_option("--values", values, "Comma-separated decreasing values")->required();
    sweep->add_option("--scenario", sweep_scenario, "Scenario JSON file");
    sweep->add_option("--output-dir", out_flag, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return diagnose("usage", "argv", e.what(), kParseError);
    }

    try {
        if (*run) return execute(load_scenario(scenario_file), {}, out_flag);
        if (*verify) return execute(load_scenario(verify_scenario), {suite}, out_flag);
        // sweep
        auto sc = load_scenario(sweep_scenario);
        sc.eps_list = parse_values(values);
        for (std::size_t i = 0; i < sc.eps_list.size(); ++i) {
            const std::string p = "--values[" + std::to_string(i) + "]";
            if (!(sc.eps_list[i] > 0.0)) throw bbgky::ValidationError(p, "must be positive");
            if (i > 0 && !(sc.eps_list[i] < sc.eps_list[i - 1])) throw bbgky::ValidationError(p, "must be strictly decreasing");
        }
        if (sc.eps_list.size() < 3) throw bbgky::ValidationError("--values", "need at least three values");
        return execute(sc, {"meanfield_sweep", "chaos"}, out_flag);
    } catch (const bbgky::ParseError& e) {
        return diagnose("parse", e.path(), e.what(), kParseError);
    } catch (const bbgky::ValidationError& e) {
        return diagnose("validation", e.path(), e.what(), kValidationError);
    } catch (const std::exception& e) {
        return diagnose("runtime", "", e.what(), kSuiteFailed);
    }
}
