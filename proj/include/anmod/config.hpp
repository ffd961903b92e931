#pragma once

// Run configuration: an INI file with sections [run], [backend],
// [optimizer], [sampling], [design_variables], [parameters] and, for the
// perfect-model backend, [solution]. Keys inside the variable and
// parameter sections are "<name>.<field>".

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "anmod/engine.hpp"
#include "anmod/evaluator.hpp"
#include "anmod/problem.hpp"

namespace anmod {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct BackendConfig {
    std::string name;
    int passes = kExactFidelity;
    bool noise = false;
    bool cross_terms = true;
    std::filesystem::path calibration;  // empty: the shipped file for the backend
};

/// Entries in file order after overrides, as (section, key, value).
using ConfigSnapshot = std::vector<std::tuple<std::string, std::string, std::string>>;

struct RunConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    BackendConfig backend;
    UpdateSettings optimizer;
    int sample_count = 0;
    ProblemFormulation problem;  // prepared
    DesignPoint solution;        // perfect_model only
    ConfigSnapshot snapshot;

    /// Evaluator fidelity: the pass count when noise is on, otherwise exact.
    int fidelity() const { return backend.noise ? backend.passes : kExactFidelity; }
};

/// Overrides are "section.key=value"; the key may itself contain dots.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Default calibration file shipped for a backend.
std::filesystem::path default_calibration(const std::string& backend);

std::unique_ptr<Evaluator> make_backend(const RunConfig& config);

std::vector<std::string> backend_names();

}  // namespace anmod
