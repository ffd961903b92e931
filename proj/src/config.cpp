#include "anmod/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "anmod/surrogates.hpp"

#ifndef ANMOD_DATA_DIR
#define ANMOD_DATA_DIR "data"
#endif

namespace anmod {

namespace {

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) out += (out.empty() ? "" : "\n") + l;
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_bool(const std::string& text, bool& out) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes" || t == "on") return out = true, true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return out = false, true;
    return false;
}

class Reader {
public:
    explicit Reader(ConfigSnapshot entries) : entries_(std::move(entries)) {}

    std::vector<std::string> problems;

    std::vector<std::pair<std::string, std::string>> section(const std::string& name) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [s, k, v] : entries_)
            if (s == name) out.emplace_back(k, v);
        return out;
    }

    std::optional<std::string> take(const std::string& section, const std::string& key) {
        used_.insert({section, key});
        for (const auto& [s, k, v] : entries_)
            if (s == section && k == key) return v;
        return std::nullopt;
    }

    template <typename T>
    void number(const std::string& section, const std::string& key, T& out) {
        if (auto v = take(section, key); v && !parse_number(*v, out))
            problems.push_back("[" + section + "] " + key + ": '" + *v + "' is not a valid number");
    }

    void boolean(const std::string& section, const std::string& key, bool& out) {
        if (auto v = take(section, key); v && !parse_bool(*v, out))
            problems.push_back("[" + section + "] " + key + ": '" + *v + "' is not a boolean");
    }

    void mark(const std::string& section, const std::string& key) { used_.insert({section, key}); }

    void report_unknown() {
        for (const auto& [s, k, v] : entries_)
            if (!used_.count({s, k})) problems.push_back("[" + s + "] " + k + ": unknown key");
    }

private:
    ConfigSnapshot entries_;
    std::set<std::pair<std::string, std::string>> used_;
};

ConfigSnapshot read_entries(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
    }
    ConfigSnapshot out;
    for (const auto& [section, keys] : tree) {
        if (keys.empty() && !keys.data().empty())
            throw ConfigError({"key '" + section + "' appears outside of any section"});
        for (const auto& [key, value] : keys) out.emplace_back(section, key, trim(value.data()));
    }
    return out;
}

void apply_override(ConfigSnapshot& entries, const std::string& text) {
    const auto eq = text.find('=');
    const auto dot = text.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError({"override '" + text + "' must look like section.key=value"});
    const std::string section = trim(text.substr(0, dot));
    const std::string key = trim(text.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(text.substr(eq + 1));
    for (auto& [s, k, v] : entries) {
        if (s == section && k == key) {
            v = value;
            return;
        }
    }
    entries.emplace_back(section, key, value);
}

std::pair<std::string, std::string> split_field(const std::string& key) {
    const auto dot = key.rfind('.');
    if (dot == std::string::npos) return {key, ""};
    return {key.substr(0, dot), key.substr(dot + 1)};
}

void read_problem(Reader& r, RunConfig& cfg) {
    ProblemFormulation pf;
    pf.name = cfg.name;

    std::vector<std::string> var_order;
    for (const auto& [key, value] : r.section("design_variables")) {
        const auto [name, field] = split_field(key);
        if (std::find(var_order.begin(), var_order.end(), name) == var_order.end()) var_order.push_back(name);
    }
    for (const auto& name : var_order) {
        DesignVariable dv;
        dv.name = name;
        bool ok = true;
        for (auto [field, slot] : {std::pair{"value", &dv.value}, {"lower", &dv.lower_bound}, {"upper", &dv.upper_bound}}) {
            const std::string key = name + "." + field;
            auto v = r.take("design_variables", key);
            if (!v) {
                r.problems.push_back("[design_variables] " + key + ": missing");
                ok = false;
            } else if (!parse_number(*v, *slot)) {
                r.problems.push_back("[design_variables] " + key + ": '" + *v + "' is not a valid number");
                ok = false;
            }
        }
        if (auto u = r.take("design_variables", name + ".unit")) dv.unit = *u;
        if (ok) pf.design_variables.push_back(dv);
    }

    std::vector<std::string> par_order;
    for (const auto& [key, value] : r.section("parameters")) {
        const auto [name, field] = split_field(key);
        if (std::find(par_order.begin(), par_order.end(), name) == par_order.end()) par_order.push_back(name);
    }
    auto expression = [&](const std::string& key, const std::string& text) -> std::optional<ModelExpression> {
        try {
            return parse(text);
        } catch (const ParseError& e) {
            r.problems.push_back("[parameters] " + key + ": " + e.what());
            return std::nullopt;
        }
    };
    for (const auto& name : par_order) {
        Parameter p;
        p.name = name;
        if (auto t = r.take("parameters", name + ".target")) {
            double v = 0.0;
            if (!parse_number(*t, v)) {
                r.problems.push_back("[parameters] " + name + ".target: '" + *t + "' is not a valid number");
            }
            p.target = v;
            p.kind = ParameterKind::targeted;
        }
        if (auto m = r.take("parameters", name + ".model")) p.model = expression(name + ".model", *m);
        if (auto d = r.take("parameters", name + ".derived")) {
            p.derivation = expression(name + ".derived", *d);
            if (p.target) {
                r.problems.push_back("[parameters] " + name + ": a derived parameter cannot have a target");
            }
            p.kind = ParameterKind::derived;
        }
        if (auto u = r.take("parameters", name + ".unit")) p.unit = *u;
        pf.parameters.push_back(std::move(p));
    }
    if (!r.problems.empty()) return;
    try {
        cfg.problem = prepare(std::move(pf));
    } catch (const InvalidProblem& e) {
        for (const auto& v : e.report().violations) r.problems.push_back(std::string(to_string(v.kind)) + ": " + v.message);
    }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration:\n" + join(problems)), problems_(std::move(problems)) {}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides) {
    auto entries = read_entries(text);
    for (const auto& o : overrides) apply_override(entries, o);

    RunConfig cfg;
    cfg.snapshot = entries;
    Reader r(entries);

    cfg.name = r.take("run", "name").value_or("run");
    r.number("run", "seed", cfg.seed);
    if (auto out = r.take("run", "output_dir")) cfg.output_dir = base_dir / *out;

    cfg.backend.name = r.take("backend", "name").value_or("");
    if (cfg.backend.name.empty()) r.problems.push_back("[backend] name: missing");
    else if (const auto names = backend_names(); std::find(names.begin(), names.end(), cfg.backend.name) == names.end())
        r.problems.push_back("[backend] name: unknown backend '" + cfg.backend.name + "'");
    if (auto passes = r.take("backend", "passes")) {
        if (*passes != "exact" && (!parse_number(*passes, cfg.backend.passes) || cfg.backend.passes < 1))
            r.problems.push_back("[backend] passes: '" + *passes + "' must be a positive integer or 'exact'");
    }
    r.boolean("backend", "noise", cfg.backend.noise);
    r.boolean("backend", "cross_terms", cfg.backend.cross_terms);
    if (cfg.backend.noise && cfg.backend.passes == kExactFidelity)
        r.problems.push_back("[backend] passes: required when noise is on");
    if (auto cal = r.take("backend", "calibration")) cfg.backend.calibration = base_dir / *cal;

    auto& o = cfg.optimizer;
    r.number("optimizer", "adjustment_rate", o.adjustment_rate);
    r.number("optimizer", "cost_tolerance", o.cost_tolerance);
    r.number("optimizer", "max_cost_evaluations", o.max_cost_evaluations);
    r.number("optimizer", "convergence_tolerance", o.convergence_tolerance);
    r.number("optimizer", "max_iterations", o.max_iterations);
    r.number("optimizer", "divergence_factor", o.divergence_factor);
    try {
        o.validate();
    } catch (const std::invalid_argument& e) {
        r.problems.push_back(std::string("[optimizer] ") + e.what());
    }

    r.number("sampling", "count", cfg.sample_count);
    if (cfg.sample_count < 0) r.problems.push_back("[sampling] count: must be non-negative");

    for (const auto& [key, value] : r.section("solution")) {
        double v = 0.0;
        r.mark("solution", key);
        if (!parse_number(value, v)) r.problems.push_back("[solution] " + key + ": '" + value + "' is not a valid number");
        cfg.solution.set(key, v);
    }

    read_problem(r, cfg);
    r.report_unknown();
    if (!r.problems.empty()) throw ConfigError(r.problems);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open " + path.string()});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path(), overrides);
}

std::vector<std::string> backend_names() {
    return {"qubit_resonator", "two_qubit", "capacitance", "charge_line_t1", "perfect_model"};
}

std::filesystem::path default_calibration(const std::string& backend) {
    return std::filesystem::path(ANMOD_DATA_DIR) / "calibration" / (backend + ".ini");
}

std::unique_ptr<Evaluator> make_backend(const RunConfig& cfg) {
    const auto& b = cfg.backend;
    if (b.name == "perfect_model") {
        for (const auto& v : cfg.problem.design_variables)
            if (!cfg.solution.contains(v.name))
                throw ConfigError({"[solution] " + v.name + ": required by the perfect_model backend"});
        return std::make_unique<PerfectModelEvaluator>(
            cfg.problem, PerfectModelEvaluator::scales_for_solution(cfg.problem, cfg.solution));
    }
    const auto table = CalibrationTable::load(b.calibration.empty() ? default_calibration(b.name) : b.calibration);
    const auto noise = b.noise ? NoiseModel::eigenmode() : NoiseModel::disabled();
    if (b.name == "qubit_resonator")
        return std::make_unique<QubitResonatorSurrogate>(QubitResonatorConstants::from(table), noise, b.cross_terms);
    if (b.name == "two_qubit")
        return std::make_unique<TwoQubitCouplerSurrogate>(TwoQubitConstants::from(table), noise, b.cross_terms);
    if (b.name == "capacitance")
        return std::make_unique<CapacitanceSurrogate>(CapacitanceConstants::from(table), noise, b.cross_terms);
    if (b.name == "charge_line_t1")
        return std::make_unique<ChargeLineT1Surrogate>(ChargeLineConstants::from(table), noise);
    throw ConfigError({"[backend] name: unknown backend '" + b.name + "'"});
}

}  // namespace anmod
