#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "bbgky/suites.hpp"

using namespace bbgky;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bbgky_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Json builtin() { return Json::parse(builtin_cm1_scenario()); }

/// Runs the CLI; returns its exit code. Output goes to files in `dir`.
int run_cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const std::string cmd = env + " \"" BBGKY_VERIFY_PATH "\" " + args + " > \"" + (dir / "stdout.txt").string() +
                            "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

template <typename E>
std::string error_path(const Json& j) {
    try {
        scenario_from_json(j);
    } catch (const E& e) {
        return e.path();
    }
    return "<no error>";
}

}  // namespace

TEST(Io, MatrixRoundTrip) {
    Matrix m(2, 2);
    m << Complex(1, 2), Complex(0, -1), Complex(3.5, 0), Complex(-1e-17, 4);
    const Json j = to_json(m);
    EXPECT_EQ(j[0][0], Json::array({1.0, 2.0}));
    EXPECT_EQ(matrix_from_json(Json::parse(j.dump()), "m"), m);
    // bare numbers are real
    EXPECT_EQ(matrix_from_json(Json::parse("[[1, 0], [0, 2]]"), "m")(1, 1), Complex(2, 0));
}

TEST(Io, SequenceRoundTrip) {
    const auto s = product_sequence(SequenceKind::reduced_density, cm1_one_particle_state(), 2, true);
    const auto back = sequence_from_json(Json::parse(to_json(s).dump()), "seq");
    EXPECT_EQ(back.kind(), s.kind());
    EXPECT_EQ(back.finite(), true);
    EXPECT_EQ(max_trace_norm_difference(back, s, 0), 0.0);
}

TEST(Io, MalformedInputCarriesPaths) {
    try {
        matrix_from_json(Json::parse("[[1, 2], [3]]"), "system.K");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.path(), "system.K[1]");
    }
    try {
        operator_from_json(Json::parse("[[1, 2], [3, 4]]"), 2, 2, "x");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.path(), "x");
    }
    EXPECT_THROW(complex_from_json(Json::parse("\"a\""), "z"), ParseError);
    EXPECT_THROW(complex_from_json(Json::parse("[1, 2, 3]"), "z"), ParseError);
}

TEST(Scenario, BuiltinParses) {
    const auto sc = parse_scenario(builtin_cm1_scenario());
    EXPECT_EQ(sc.system.d, 2);
    EXPECT_EQ(sc.suites.size(), suite_names().size());
    ASSERT_TRUE(sc.initial_state.correlations.has_value());
    EXPECT_GE(sc.initial_state.correlations->max_n(), sc.system.N_max + sc.system.n_max);
}

TEST(Scenario, ValidationErrorsNameTheField) {
    auto j = builtin();
    j["system"]["K"] = Json::parse("[[0, 1], [2, 0]]");
    EXPECT_EQ(error_path<ValidationError>(j), "system.K");

    j = builtin();
    j["system"]["epsilon"] = -1;
    EXPECT_EQ(error_path<ValidationError>(j), "system.epsilon");

    j = builtin();
    j["eps_list"] = Json::parse("[0.5, 0.5, 0.1]");
    EXPECT_EQ(error_path<ValidationError>(j), "eps_list[1]");

    j = builtin();
    j["suites"] = Json::parse("[\"chaos\", \"bogus\"]");
    EXPECT_EQ(error_path<ValidationError>(j), "suites[1]");

    j = builtin();
    j["initial_state"]["F1"] = Json::parse("[[0.5, 0], [0, 0.2]]");
    EXPECT_EQ(error_path<ValidationError>(j), "initial_state.F1");

    j = builtin();
    j["t_grid"] = Json::parse("[0.3, 0.1]");
    EXPECT_EQ(error_path<ValidationError>(j), "t_grid[1]");

    j = builtin();
    j.erase("system");
    EXPECT_EQ(error_path<ParseError>(j), "$.system");

    j = builtin();
    j["system"]["N_max"] = 2.5;
    EXPECT_EQ(error_path<ParseError>(j), "system.N_max");
}

TEST(Scenario, UnknownToleranceKeyIsRejected) {
    auto sc = parse_scenario(builtin_cm1_scenario());
    sc.tolerances["not_a_key"] = 1.0;
    EXPECT_THROW(run_scenario(sc, {"duality"}), ValidationError);
}

TEST(Report, DeterministicAndCsvHeaders) {
    auto sc = parse_scenario(builtin_cm1_scenario());
    const auto a = run_scenario(sc, {"duality"});
    const auto b = run_scenario(sc, {"duality"});
    EXPECT_EQ(report_json(sc, a).dump(2), report_json(sc, b).dump(2));
    EXPECT_EQ(sweeps_csv(a), "suite,s,n,epsilon,distance,fitted_order\n");
    const Json r = report_json(sc, a);
    EXPECT_EQ(r["schema_version"], kReportSchemaVersion);
    EXPECT_EQ(r["suites"][0]["status"], "pass");
    EXPECT_EQ(r.dump().find("runtime_seconds"), std::string::npos);
}

TEST(Cli, ExitCodesAndOutputs) {
    const auto dir = temp_dir("cli");
    EXPECT_EQ(run_cli("verify --suite duality --output-dir \"" + (dir / "out").string() + "\"", dir), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "timings.json"));
    EXPECT_TRUE(fs::exists(dir / "out" / "sweeps.csv"));

    write_text_file((dir / "broken.json").string(), "{\"system\": ");
    EXPECT_EQ(run_cli("run \"" + (dir / "broken.json").string() + "\"", dir), 2);

    auto j = builtin();
    j["system"]["Phi"] = Json::parse("[[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]]");
    write_text_file((dir / "invalid.json").string(), j.dump());
    EXPECT_EQ(run_cli("run \"" + (dir / "invalid.json").string() + "\"", dir), 3);
    const Json diag = Json::parse(read_text_file((dir / "stderr.txt").string()));
    EXPECT_EQ(diag["error"], "validation");
    EXPECT_EQ(diag["path"], "system.Phi");

    EXPECT_EQ(run_cli("verify --suite nope", dir), 2);
    EXPECT_EQ(run_cli("sweep --param epsilon --values 0.5,0.25,abc", dir), 2);
    EXPECT_EQ(run_cli("sweep --param epsilon --values 0.25,0.5,0.1", dir), 3);

    // a failing suite: impossible tolerance
    j = builtin();
    j["suites"] = Json::array({"duality"});
    j["tolerances"] = Json{{"duality", 0.0}};
    j["output_dir"] = (dir / "fail").string();
    write_text_file((dir / "fail.json").string(), j.dump());
    EXPECT_EQ(run_cli("run \"" + (dir / "fail.json").string() + "\"", dir), 1);
    EXPECT_TRUE(fs::exists(dir / "fail" / "report.json"));
}

TEST(Cli, OutputDirectoryPrecedence) {
    const auto dir = temp_dir("precedence");
    auto j = builtin();
    j["suites"] = Json::array({"duality"});
    j["output_dir"] = (dir / "from_scenario").string();
    write_text_file((dir / "s.json").string(), j.dump());
    const std::string scen = "run \"" + (dir / "s.json").string() + "\"";
    const std::string env = "BBGKY_OUTPUT_DIR=\"" + (dir / "from_env").string() + "\"";

    EXPECT_EQ(run_cli(scen, dir), 0);
    EXPECT_TRUE(fs::exists(dir / "from_scenario" / "report.json"));
    EXPECT_EQ(run_cli(scen, dir, env), 0);
    EXPECT_TRUE(fs::exists(dir / "from_env" / "report.json"));
    EXPECT_EQ(run_cli(scen + " --output-dir \"" + (dir / "from_flag").string() + "\"", dir, env), 0);
    EXPECT_TRUE(fs::exists(dir / "from_flag" / "report.json"));
}
