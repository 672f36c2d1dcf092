#pragma once

// Scenario JSON loading/saving. Layout:
//
//   {
//     "plant": {
//       "modes": {"1": {"A": [[..]], "B": [[..]], "C": [[..]], "K": [[..]], "L": [[..]]}, ...},
//       "jumps": {"2,1": [[..]], "1,2": [[..]]}
//     },
//     "design": {"Q": {"1": [[..]], ...}, "kappa": .., "tau": .., "tau_bar": ..,
//                "chi": .., "N0": .., "tau_a": ..},
//     "quantizer": {"M": .., "Delta": .., "Delta0": ..},          // Delta0 optional
//     "signal": {"initial_mode": 1, "switches": [[3.5, 2], ..]}   // or "generate": {...}
//     "sim": {"x0": [..], "horizon": .., "h": ..}
//   }

#include "qswitch/plant.hpp"
#include "qswitch/simulator.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qswitch {

using nlohmann::json;

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Matrix matrix_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ScenarioError(where + ": expected a matrix (array of rows)");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw ScenarioError(where + ": ragged matrix rows");
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw ScenarioError(where + ": non-numeric entry");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json j = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

inline const json& need(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ScenarioError(where + ": missing field '" + key + "'");
    return *it;
}

}  // namespace detail

inline Scenario scenario_from_json(const json& j) {
    using detail::matrix_from_json;
    using detail::need;
    Scenario sc;

    const json& jp = need(j, "plant", "scenario");
    for (const auto& [key, jm] : need(jp, "modes", "plant").items()) {
        ModeDynamics md;
        md.A = matrix_from_json(need(jm, "A", "mode " + key), "A");
        md.B = matrix_from_json(need(jm, "B", "mode " + key), "B");
        md.C = matrix_from_json(need(jm, "C", "mode " + key), "C");
        md.K = matrix_from_json(need(jm, "K", "mode " + key), "K");
        md.L = matrix_from_json(need(jm, "L", "mode " + key), "L");
        sc.inputs.plant.modes[std::stoi(key)] = std::move(md);
    }
    if (jp.contains("jumps")) {
        for (const auto& [key, jm] : jp.at("jumps").items()) {
            const auto comma = key.find(',');
            if (comma == std::string::npos)
                throw ScenarioError("plant.jumps: key must be 'p2,p1', got '" + key + "'");
            const ModeId p2 = std::stoi(key.substr(0, comma));
            const ModeId p1 = std::stoi(key.substr(comma + 1));
            sc.inputs.plant.jumps[{p2, p1}] = matrix_from_json(jm, "jumps " + key);
        }
    }

    const json& jd = need(j, "design", "scenario");
    for (const auto& [key, jm] : need(jd, "Q", "design").items())
        sc.inputs.Q[std::stoi(key)] = matrix_from_json(jm, "Q " + key);
    sc.inputs.kappa = need(jd, "kappa", "design").get<double>();
    sc.inputs.tau = need(jd, "tau", "design").get<double>();
    sc.inputs.tau_bar = need(jd, "tau_bar", "design").get<double>();
    sc.inputs.chi = need(jd, "chi", "design").get<double>();
    sc.inputs.n0 = need(jd, "N0", "design").get<double>();
    sc.inputs.tau_a = need(jd, "tau_a", "design").get<double>();

    const json& jq = need(j, "quantizer", "scenario");
    sc.inputs.quantizer = QuantizerConfig::make(
        need(jq, "M", "quantizer").get<double>(), need(jq, "Delta", "quantizer").get<double>(),
        static_cast<int>(sc.inputs.plant.p()),
        jq.contains("Delta0") ? jq.at("Delta0").get<double>() : -1.0);

    const json& js = need(j, "signal", "scenario");
    sc.signal.initial_mode = need(js, "initial_mode", "signal").get<ModeId>();
    const json& jsim = need(j, "sim", "scenario");
    sc.horizon = need(jsim, "horizon", "sim").get<double>();
    sc.h = need(jsim, "h", "sim").get<double>();
    if (js.contains("generate")) {
        const json& jg = js.at("generate");
        std::vector<ModeId> ids;
        for (const auto& [key, jm] : sc.inputs.plant.modes) ids.push_back(key);
        sc.seed = detail::need(jg, "seed", "signal.generate").get<std::uint64_t>();
        sc.signal = generate_adt_signal(
            ids, detail::need(jg, "N0", "signal.generate").get<double>(),
            detail::need(jg, "tau_a", "signal.generate").get<double>(),
            detail::need(jg, "horizon", "signal.generate").get<double>(), sc.seed);
    } else {
        for (const auto& jsw : need(js, "switches", "signal")) {
            if (!jsw.is_array() || jsw.size() != 2)
                throw ScenarioError("signal.switches: expected [time, mode] pairs");
            sc.signal.switches.emplace_back(jsw[0].get<double>(), jsw[1].get<ModeId>());
        }
    }

    const json& jx0 = need(jsim, "x0", "sim");
    sc.x0 = Vector(jx0.size());
    for (Eigen::Index i = 0; i < sc.x0.size(); ++i) sc.x0(i) = jx0[i].get<double>();

    // snap switch times to the simulation grid
    for (auto& [t, m] : sc.signal.switches) t = std::lround(t / sc.h) * sc.h;

    sc.validate();
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError("cannot open scenario file: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ScenarioError("JSON parse error in " + path + ": " + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const json::exception& e) {
        throw ScenarioError("schema error in " + path + ": " + e.what());
    }
}

inline json scenario_to_json(const Scenario& sc) {
    using detail::matrix_to_json;
    json j;
    for (const auto& [id, md] : sc.inputs.plant.modes) {
        json jm;
        jm["A"] = matrix_to_json(md.A);
        jm["B"] = matrix_to_json(md.B);
        jm["C"] = matrix_to_json(md.C);
        jm["K"] = matrix_to_json(md.K);
        jm["L"] = matrix_to_json(md.L);
        j["plant"]["modes"][std::to_string(id)] = std::move(jm);
    }
    for (const auto& [key, r] : sc.inputs.plant.jumps)
        j["plant"]["jumps"][std::to_string(key.first) + "," + std::to_string(key.second)] =
            matrix_to_json(r);
    for (const auto& [id, q] : sc.inputs.Q)
        j["design"]["Q"][std::to_string(id)] = matrix_to_json(q);
    j["design"]["kappa"] = sc.inputs.kappa;
    j["design"]["tau"] = sc.inputs.tau;
    j["design"]["tau_bar"] = sc.inputs.tau_bar;
    j["design"]["chi"] = sc.inputs.chi;
    j["design"]["N0"] = sc.inputs.n0;
    j["design"]["tau_a"] = sc.inputs.tau_a;
    j["quantizer"]["M"] = sc.inputs.quantizer.M;
    j["quantizer"]["Delta"] = sc.inputs.quantizer.Delta;
    j["quantizer"]["Delta0"] = sc.inputs.quantizer.Delta0;
    j["signal"]["initial_mode"] = sc.signal.initial_mode;
    j["signal"]["switches"] = json::array();
    for (const auto& [t, m] : sc.signal.switches)
        j["signal"]["switches"].push_back(json::array({t, m}));
    j["sim"]["x0"] = json::array();
    for (Eigen::Index i = 0; i < sc.x0.size(); ++i) j["sim"]["x0"].push_back(sc.x0(i));
    j["sim"]["horizon"] = sc.horizon;
    j["sim"]["h"] = sc.h;
    return j;
}

}  // namespace qswitch
