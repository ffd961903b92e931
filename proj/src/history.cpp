#include "anmod/history.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <json.hpp>

namespace anmod {

using json = nlohmann::ordered_json;

namespace {

template <typename Tag>
json write_values(const NamedValues<Tag>& values) {
    json out = json::object();
    for (const auto& [name, v] : values) out[name] = v;
    return out;
}

template <typename Tag>
NamedValues<Tag> read_values(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_object()) throw std::runtime_error(std::string("missing object '") + key + "'");
    NamedValues<Tag> out;
    const json& obj = j[key];
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!it->is_number()) throw std::runtime_error(std::string("'") + key + "." + it.key() + "' is not a number");
        out.set(it.key(), it->template get<double>());
    }
    return out;
}

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace

HistoryError::HistoryError(std::size_t line, const std::string& message)
    : std::runtime_error("history line " + std::to_string(line) + ": " + message), line_(line) {}

std::string history_line(const RunHistory& history, const IterationRecord& r) {
    json j;
    j["problem"] = history.problem;
    j["k"] = r.k;
    j["x"] = write_values(r.x);
    j["y"] = write_values(r.y);
    j["y_pred"] = write_values(r.predicted);
    j["target"] = write_values(history.targets);
    j["cost"] = r.cost ? json(*r.cost) : json(nullptr);
    j["status"] = to_string(r.status);
    j["seed"] = r.seed;
    json blocks = json::array();
    for (const auto& b : r.blocks)
        blocks.push_back({{"rank", b.rank}, {"parameters", b.parameters}, {"variables", b.variables}});
    j["blocks"] = std::move(blocks);
    j["note"] = r.note;
    return j.dump();
}

void write_history(std::ostream& out, const RunHistory& history) {
    for (const auto& r : history.records) out << history_line(history, r) << '\n';
}

void write_history(const std::filesystem::path& path, const RunHistory& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_history(out, history);
}

RunHistory read_history(std::istream& in) {
    RunHistory h;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(text);
            IterationRecord r;
            r.k = j.at("k").get<int>();
            if (r.k != static_cast<int>(h.records.size()))
                throw std::runtime_error("iteration index " + std::to_string(r.k) + " is out of sequence");
            r.x = read_values<DesignTag>(j, "x");
            r.y = read_values<ParameterTag>(j, "y");
            r.predicted = read_values<ParameterTag>(j, "y_pred");
            if (!j.at("cost").is_null()) r.cost = j.at("cost").get<double>();
            const auto status = parse_run_status(j.at("status").get<std::string>());
            if (!status) throw std::runtime_error("unknown status '" + j.at("status").get<std::string>() + "'");
            r.status = *status;
            r.seed = j.at("seed").get<std::uint64_t>();
            for (const auto& b : j.at("blocks"))
                r.blocks.push_back({b.at("rank").get<int>(), b.at("parameters").get<std::vector<std::string>>(),
                                    b.at("variables").get<std::vector<std::string>>()});
            r.note = j.value("note", "");
            if (h.records.empty()) {
                h.problem = j.at("problem").get<std::string>();
                h.targets = read_values<ParameterTag>(j, "target");
            }
            h.status = r.status;
            h.message = r.note;
            h.records.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw HistoryError(line, e.what());
        }
    }
    if (h.records.empty()) throw HistoryError(line, "history is empty");
    return h;
}

RunHistory read_history(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_history(in);
}

void write_summary(const std::filesystem::path& path, const RunHistory& h, const RunConfig& cfg) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
        tree.get_child(pt::ptree::path_type(section, '\0')).push_back({key, pt::ptree(value)});
    };
    for (const char* s : {"run", "final_relative_error", "final_design", "config"})
        tree.push_back({s, pt::ptree()});
    put("run", "problem", h.problem);
    put("run", "status", to_string(h.status));
    put("run", "iterations", std::to_string(h.iterations()));
    put("run", "seed", std::to_string(cfg.seed));
    put("run", "message", h.message);
    if (!h.records.empty()) {
        const auto& last = h.records.back();
        for (const auto& [name, target] : h.targets) {
            put("final_relative_error", name,
                last.y.contains(name) ? shortest(last.y.at(name) / target - 1.0) : std::string("n/a"));
        }
        for (const auto& [name, v] : last.x) put("final_design", name, shortest(v));
    }
    for (const auto& [s, k, v] : cfg.snapshot) put("config", s + "." + k, v);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    pt::write_ini(out, tree);
}

void save_run(const std::filesystem::path& dir, const RunHistory& history, const RunConfig& config) {
    std::filesystem::create_directories(dir);
    write_history(dir / "history.jsonl", history);
    write_summary(dir / "summary.ini", history, config);
}

}  // namespace anmod
