// scenario.hpp - scenario files: system, initial state, grids, suites.

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bbgky/io.hpp"
#include "bbgky/kinetic.hpp"

namespace bbgky {

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"cluster_roundtrip", "oracle_equiv_state", "oracle_equiv_observable",
                                                "duality",           "residuals",          "meanfield_sweep",
                                                "chaos",             "gqke_crosscheck",    "vlasov_ic"};
    return names;
}

struct InitialState {
    enum class Kind { factorized, correlated, explicit_density } kind = Kind::factorized;
    Operator F1 = Operator::identity(1, 2);
    std::optional<OperatorSequence> correlations;  // kernels g_n, n >= 2 (correlated)
    std::optional<OperatorSequence> D;             // explicit density sequence
};

inline std::string to_string(InitialState::Kind k) {
    switch (k) {
        case InitialState::Kind::factorized: return "factorized";
        case InitialState::Kind::correlated: return "correlated";
        case InitialState::Kind::explicit_density: return "explicit";
    }
    return "unknown";
}

struct Scenario {
    std::string name = "scenario";
    SystemSpec system = SystemSpec::cm1();
    InitialState initial_state;
    std::vector<double> t_grid{0.1, 0.3, 0.7};
    std::vector<std::string> suites;
    std::vector<double> eps_list{0.5, 0.25, 0.125, 0.0625};
    std::string output_dir = "bbgky_output";
    std::map<std::string, double> tolerances;  // overrides of suite defaults
};

namespace detail {

inline void check_density_operator(const Operator& f, const std::string& path) {
    if (!is_hermitian(f)) throw ValidationError(path, "not Hermitian");
    if (std::abs(f.trace() - 1.0) > 1e-9) throw ValidationError(path, "trace must be 1");
    if (min_eigenvalue(f) < -1e-12) throw ValidationError(path, "not positive semidefinite");
}

inline InitialState initial_state_from_json(const Json& j, const SystemSpec& sys, const std::string& path) {
    InitialState st;
    const Json& kind = require(j, "kind", path);
    if (!kind.is_string()) throw ParseError(path + ".kind", "expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "factorized") st.kind = InitialState::Kind::factorized;
    else if (k == "correlated") st.kind = InitialState::Kind::correlated;
    else if (k == "explicit") st.kind = InitialState::Kind::explicit_density;
    else throw ValidationError(path + ".kind", "unknown initial state kind '" + k + "'");

    if (st.kind == InitialState::Kind::explicit_density) {
        const Json& dj = require(j, "D", path);
        auto e = entries_from_json(dj, sys.d, SequenceKind::density, path + ".D");
        for (std::size_t n = 1; n < e.size(); ++n)
            if (!is_hermitian(e[n])) throw ValidationError(path + ".D." + std::to_string(n), "not Hermitian");
        st.D = OperatorSequence(SequenceKind::density, sys.d, std::move(e), true);
        if (st.D->max_n() > sys.N_max) throw ValidationError(path + ".D", "entries beyond system.N_max");
        if (std::abs(normalization(*st.D)) < 1e-14) throw ValidationError(path + ".D", "zero normalization");
        st.F1 = reduce_density(*st.D)[1];
        return st;
    }
    st.F1 = operator_from_json(require(j, "F1", path), 1, sys.d, path + ".F1");
    check_density_operator(st.F1, path + ".F1");
    if (st.kind == InitialState::Kind::correlated) {
        const int top = sys.N_max + sys.n_max + 2;
        if (j.contains("pair_correlation")) {
            const Operator c2 = operator_from_json(j["pair_correlation"], 2, sys.d, path + ".pair_correlation");
            if (!is_hermitian(c2)) throw ValidationError(path + ".pair_correlation", "not Hermitian");
            st.correlations = kernels_from_pair_correlation(c2, top);
        } else {
            const Json& cj = require(j, "correlations", path);
            auto e = entries_from_json(cj, sys.d, SequenceKind::correlation, path + ".correlations");
            for (std::size_t n = 2; n < e.size(); ++n)
                if (!is_hermitian(e[n]))
                    throw ValidationError(path + ".correlations." + std::to_string(n), "not Hermitian");
            if (e.size() < 3) throw ValidationError(path + ".correlations", "g_2 is required");
            e[1] = Operator::identity(1, sys.d);
            st.correlations = OperatorSequence(SequenceKind::correlation, sys.d, std::move(e), false);
        }
    }
    return st;
}

}  // namespace detail

inline Scenario scenario_from_json(const Json& j) {
    Scenario sc;
    if (!j.is_object()) throw ParseError("$", "scenario must be a JSON object");
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw ParseError("name", "expected a string");
        sc.name = j["name"].get<std::string>();
    }
    sc.system = system_from_json(detail::require(j, "system", "$"), "system");
    sc.initial_state = detail::initial_state_from_json(detail::require(j, "initial_state", "$"), sc.system, "initial_state");
    if (j.contains("t_grid")) sc.t_grid = detail::numbers(j["t_grid"], "t_grid");
    for (std::size_t i = 1; i < sc.t_grid.size(); ++i)
        if (!(sc.t_grid[i] > sc.t_grid[i - 1])) throw ValidationError("t_grid[" + std::to_string(i) + "]", "must be strictly increasing");
    if (j.contains("eps_list")) sc.eps_list = detail::numbers(j["eps_list"], "eps_list");
    for (std::size_t i = 0; i < sc.eps_list.size(); ++i) {
        const std::string p = "eps_list[" + std::to_string(i) + "]";
        if (!(sc.eps_list[i] > 0.0)) throw ValidationError(p, "must be positive");
        if (i > 0 && !(sc.eps_list[i] < sc.eps_list[i - 1])) throw ValidationError(p, "must be strictly decreasing");
    }
    const Json& suites = detail::require(j, "suites", "$");
    if (!suites.is_array()) throw ParseError("suites", "expected an array of suite names");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < suites.size(); ++i) {
        const std::string p = "suites[" + std::to_string(i) + "]";
        if (!suites[i].is_string()) throw ParseError(p, "expected a string");
        const std::string name = suites[i].get<std::string>();
        const auto& known = suite_names();
        if (std::find(known.begin(), known.end(), name) == known.end()) throw ValidationError(p, "unknown suite '" + name + "'");
        if (!seen.insert(name).second) throw ValidationError(p, "suite '" + name + "' listed twice");
        sc.suites.push_back(name);
    }
    const bool sweeps = seen.count("meanfield_sweep") || seen.count("chaos");
    if (sweeps && sc.eps_list.size() < 3) throw ValidationError("eps_list", "sweep suites need at least three values");
    if (j.contains("output_dir")) {
        if (!j["output_dir"].is_string()) throw ParseError("output_dir", "expected a string");
        sc.output_dir = j["output_dir"].get<std::string>();
    }
    if (j.contains("tolerances")) {
        const Json& tj = j["tolerances"];
        if (!tj.is_object()) throw ParseError("tolerances", "expected an object");
        for (auto it = tj.begin(); it != tj.end(); ++it)
            sc.tolerances[it.key()] = detail::number(it.value(), "tolerances." + it.key());
    }
    return sc;
}

inline Scenario parse_scenario(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& ex) {
        throw ParseError("$", std::string("invalid JSON: ") + ex.what());
    }
    return scenario_from_json(j);
}

/// The built-in CM1 scenario: every suite, CM1 system, F1 = diag(3/4, 1/4)
/// with a pair correlation 0.2 sigma_z x sigma_z for the correlated checks.
inline const char* builtin_cm1_scenario() {
    return R"({
  "name": "cm1",
  "system": {
    "d": 2,
    "K": [[0, 1], [1, 0]],
    "Phi": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]],
    "epsilon": 0.5,
    "N_max": 3,
    "n_max": 3
  },
  "initial_state": {
    "kind": "correlated",
    "F1": [[0.75, 0], [0, 0.25]],
    "pair_correlation": [[0.2, 0, 0, 0], [0, -0.2, 0, 0], [0, 0, -0.2, 0], [0, 0, 0, 0.2]]
  },
  "t_grid": [0.1, 0.3, 0.7],
  "eps_list": [0.5, 0.25, 0.125, 0.0625],
  "suites": ["cluster_roundtrip", "oracle_equiv_state", "oracle_equiv_observable", "duality", "residuals",
             "meanfield_sweep", "chaos", "gqke_crosscheck", "vlasov_ic"],
  "output_dir": "bbgky_output"
})";
}

}  // namespace bbgky
