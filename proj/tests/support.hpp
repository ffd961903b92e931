#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "anmod/config.hpp"
#include "anmod/problem.hpp"

namespace test {

inline std::filesystem::path data_dir() { return ANMOD_TEST_DATA_DIR; }
inline std::filesystem::path config_dir() { return ANMOD_TEST_CONFIG_DIR; }

inline std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::path(ANMOD_TEST_SCRATCH_DIR) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline nlohmann::json golden(const std::string& backend) {
    std::ifstream in(data_dir() / "golden" / (backend + ".json"));
    return nlohmann::json::parse(in);
}

inline anmod::DesignPoint design_from(const nlohmann::json& j) {
    anmod::DesignPoint x;
    for (auto it = j.begin(); it != j.end(); ++it) x.set(it.key(), it->get<double>());
    return x;
}

inline anmod::Parameter targeted(std::string name, double target, const std::string& model) {
    anmod::Parameter p;
    p.name = std::move(name);
    p.kind = anmod::ParameterKind::targeted;
    p.target = target;
    p.model = anmod::parse(model);
    return p;
}

inline anmod::Parameter derived(std::string name, const std::string& expr) {
    anmod::Parameter p;
    p.name = std::move(name);
    p.kind = anmod::ParameterKind::derived;
    p.derivation = anmod::parse(expr);
    return p;
}

inline anmod::Parameter untargeted(std::string name) {
    anmod::Parameter p;
    p.name = std::move(name);
    return p;
}

inline anmod::DesignVariable variable(std::string name, double value, double lower, double upper) {
    return {std::move(name), value, lower, upper, ""};
}

/// The single qubit-resonator formulation with the shipped targets and initial values.
inline anmod::ProblemFormulation reference_problem(const std::string& chi_model =
                                            "(w_res_qb / w_qb)^2 * alpha / (Delta * (Delta - alpha))") {
    anmod::ProblemFormulation pf;
    pf.name = "qubit_resonator";
    pf.design_variables = {variable("l_res", 7500, 4000, 12000), variable("L_qb", 12.1, 5, 25),
                           variable("w_qb", 400, 100, 1100), variable("w_res_qb", 100, 100, 1100),
                           variable("l_res_tl", 400, 100, 1400)};
    pf.parameters = {targeted("f_res", 6000, "1 / l_res"),
                     targeted("f_qb", 4000, "1 / sqrt(L_qb * w_qb)"),
                     targeted("alpha", 200, "1 / w_qb"),
                     targeted("chi", 1, chi_model),
                     targeted("kappa_res", 1, "l_res_tl"),
                     derived("Delta", "f_qb - f_res")};
    return pf;
}

inline anmod::RunConfig shipped(const std::string& name, const std::vector<std::string>& overrides = {}) {
    return anmod::load_config(config_dir() / (name + ".ini"), overrides);
}

}  // namespace test
