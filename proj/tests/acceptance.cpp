// acceptance - one PASS/FAIL line per acceptance criterion on the built-in
// CM1 scenario. Thresholds are fixed here, independent of the suite
// defaults. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "bbgky/suites.hpp"
#include "oracles.hpp"

using namespace bbgky;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string title;
    bool pass = true;
    std::ostringstream detail;

    void le(const std::string& what, double v, double tol) {
        detail << what << "=" << format_double(v) << " (<= " << tol << ") ";
        if (!(v <= tol)) pass = false;
    }
    void ge(const std::string& what, double v, double tol) {
        detail << what << "=" << format_double(v) << " (>= " << tol << ") ";
        if (!(v >= tol)) pass = false;
    }
};

class Acceptance {
public:
    explicit Acceptance(Scenario sc) : sc_(std::move(sc)) {}

    const SuiteRecord& suite(const std::string& name) {
        auto it = cache_.find(name);
        if (it == cache_.end()) it = cache_.emplace(name, run_suite(name, sc_)).first;
        return it->second;
    }

    double measured(const std::string& s, const std::string& key) {
        const auto& m = suite(s).measured;
        if (!m.contains(key) || !m[key].is_number()) {
            std::cerr << "missing measurement " << s << "." << key << "\n";
            return std::numeric_limits<double>::quiet_NaN();
        }
        return m[key].get<double>();
    }

    double runtime(const std::string& s) { return suite(s).runtime_seconds; }

private:
    Scenario sc_;
    std::map<std::string, SuiteRecord> cache_;
};

int run_cli(const std::string& args) {
    const std::string cmd = "\"" BBGKY_VERIFY_PATH "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Both kinetic-generator identities on the full matrix-unit basis.
double kinetic_identity_gap() {
    const auto spec = SystemSpec::cm1();
    const Dynamics dyn(spec);
    const double t = 0.35;
    double worst = 0.0;
    for (int sp = 1; sp <= 2; ++sp) {
        for (int order = 0; order <= 1; ++order) {
            const int n = sp + order;
            const auto side = static_cast<Eigen::Index>(oracle::side(n, spec.d));
            for (Eigen::Index i = 0; i < side; ++i)
                for (Eigen::Index j = 0; j < side; ++j) {
                    const auto e = oracle::basis_element(n, spec.d, i, j);
                    const Operator ref = order == 0 ? oracle::scattering(spec, label_range(1, sp), t, e)
                                                    : oracle::second_kinetic_generator(spec, sp, t, e);
                    worst = std::max(worst, max_abs(kinetic_generator(dyn, t, sp, order, e) - ref));
                }
        }
    }
    return worst;
}

}  // namespace

int main() {
    const Scenario sc = parse_scenario(builtin_cm1_scenario());
    Acceptance a(sc);
    std::vector<Criterion> out;
    auto add = [&](int id, const std::string& title) -> Criterion& {
        out.push_back(Criterion{id, title, true, {}});
        return out.back();
    };

    {
        auto& c = add(1, "cluster round trip");
        c.le("max_residual", a.measured("cluster_roundtrip", "roundtrip_max_residual"), 1e-12);
        c.le("runtime_s", a.runtime("cluster_roundtrip"), 5.0);
    }
    {
        auto& c = add(2, "cumulant vanishing and Moebius inversion");
        c.le("cumulant_t0", a.measured("cluster_roundtrip", "cumulant_t0_max"), 1e-12);
        c.le("mobius", a.measured("cluster_roundtrip", "mobius_max"), 1e-10);
        c.le("runtime_s", a.runtime("cluster_roundtrip"), 10.0);
    }
    {
        auto& c = add(3, "state-side oracle equivalence");
        c.le("series_vs_exact", a.measured("oracle_equiv_state", "series_vs_exact_max"), 1e-10);
        c.le("runtime_s", a.runtime("oracle_equiv_state"), 30.0);
    }
    {
        auto& c = add(4, "observable-side oracle equivalence");
        for (const char* k : {"additive_max", "two_ary_max", "general_max"}) c.le(k, a.measured("oracle_equiv_observable", k), 1e-10);
    }
    {
        auto& c = add(5, "duality");
        for (const char* k : {"additive_max_gap", "two_ary_max_gap"}) c.le(k, a.measured("duality", k), 1e-10);
    }
    {
        auto& c = add(6, "hierarchy residuals");
        for (const char* k : {"von_neumann_hierarchy", "bbgky", "dual_bbgky", "nonlinear_bbgky", "dual_vlasov"})
            c.le(k, a.measured("residuals", k), 1e-6);
    }
    {
        auto& c = add(7, "route equivalence");
        c.le("iteration", a.measured("oracle_equiv_state", "iteration_vs_series_max"), 1e-8);
        c.le("via_correlations", a.measured("oracle_equiv_state", "via_correlations_vs_series_max"), 1e-8);
    }
    {
        auto& c = add(8, "kinetic generator identities");
        c.le("basis_max", kinetic_identity_gap(), 1e-12);
    }
    {
        auto& c = add(9, "GQKE cross-check");
        for (int nm : {2, 3}) {
            const std::string k = "n_max" + std::to_string(nm);
            c.ge(k + "_slope", a.measured("gqke_crosscheck", k + "_slope"), nm);
            c.ge(k + "_r2", a.measured("gqke_crosscheck", k + "_r_squared"), 0.98);
        }
    }
    {
        auto& c = add(10, "mean-field cumulant limit");
        for (const char* k : {"s1_n1_fitted_order", "s1_n2_fitted_order"}) {
            const double v = a.measured("meanfield_sweep", k);
            c.ge(k, v, 0.8);
            c.le(k, v, 1.2);
        }
        c.le("runtime_s", a.runtime("meanfield_sweep"), 120.0);
    }
    {
        auto& c = add(11, "propagation of chaos");
        c.ge("s2_order", a.measured("chaos", "s2_fitted_order"), 0.8);
        c.le("pchaos_k1", a.measured("chaos", "pchaos_k1"), 1e-6);
        c.le("pchaos_k2", a.measured("chaos", "pchaos_k2"), 1e-6);
    }
    {
        auto& c = add(12, "initial correlations");
        c.le("identity_kernel", a.measured("vlasov_ic", "identity_kernel_gap"), 1e-12);
        c.le("dchaos_t0", a.measured("vlasov_ic", "dchaos_t0_gap"), 1e-12);
        c.ge("vitercc_slope", a.measured("vlasov_ic", "correlated_n_max2_slope"), 2.0);
        c.ge("vitercc_r2", a.measured("vlasov_ic", "correlated_n_max2_r_squared"), 0.98);
    }
    {
        auto& c = add(13, "Vlasov structure");
        c.le("trace", a.measured("vlasov_ic", "vlasov_trace_drift"), 1e-9);
        c.le("hermiticity", a.measured("vlasov_ic", "vlasov_hermiticity"), 1e-10);
        c.le("purity", a.measured("vlasov_ic", "vlasov_purity_drift"), 1e-8);
    }
    {
        auto& c = add(14, "CLI determinism");
        const fs::path base = fs::temp_directory_path() / "bbgky_acceptance";
        fs::remove_all(base);
        const std::string scenario = std::string(BBGKY_SOURCE_DIR) + "/scenarios/cm1.json";
        const auto start = std::chrono::steady_clock::now();
        const int r1 = run_cli("run \"" + scenario + "\" --output-dir \"" + (base / "a").string() + "\"");
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const int r2 = run_cli("run \"" + scenario + "\" --output-dir \"" + (base / "b").string() + "\"");
        bool same = false;
        try {
            same = read_text_file((base / "a" / "report.json").string()) == read_text_file((base / "b" / "report.json").string());
        } catch (const std::exception&) {
        }
        c.detail << "exit=" << r1 << "," << r2 << " identical=" << (same ? "yes" : "no") << " ";
        c.pass = r1 == 0 && r2 == 0 && same;
        c.le("runtime_s", seconds, 300.0);
    }

    bool all = true;
    for (const auto& c : out) {
        std::printf("%s %2d %s: %s\n", c.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), c.detail.str().c_str());
        all = all && c.pass;
    }
    return all ? 0 : 1;
}
