#include "meshreg/config.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <nlohmann/json.hpp>

#include "meshreg/core.hpp"

namespace meshreg {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// flat TOML subset: [section] headers, key = value with strings, numbers, booleans
std::map<std::string, std::string> parse_toml_pairs(const std::string& text) {
    std::map<std::string, std::string> out;
    std::string section;
    size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw IoError("bad TOML section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw IoError("bad TOML line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

double to_double(const std::string& v, const std::string& key) {
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw IoError("config: numeric value expected for " + key);
    }
}

int to_int(const std::string& v, const std::string& key) {
    double d = to_double(v, key);
    return static_cast<int>(d);
}

RegistrationConfig from_pairs(const std::map<std::string, std::string>& kv) {
    RegistrationConfig cfg;
    bool spacing_set = false;
    for (const auto& [key, value] : kv) {
        if (key == "lambda") cfg.lambda = to_double(value, key);
        else if (key == "basis_order") cfg.basis_order = to_int(value, key);
        else if (key == "placement") cfg.placement = placement_mode_from_string(value);
        else if (key == "pyramid_levels") cfg.pyramid_levels = to_int(value, key);
        else if (key == "max_iters") cfg.max_iters = to_int(value, key);
        else if (key == "grad_tol") cfg.grad_tol = to_double(value, key);
        else if (key == "energy_rel_tol") cfg.energy_rel_tol = to_double(value, key);
        else if (key == "edge_threshold") cfg.edge_threshold = static_cast<float>(to_double(value, key));
        else if (key == "patch.spacing") { cfg.patch.spacing = to_double(value, key); spacing_set = true; }
        else if (key == "patch.base_radius") cfg.patch.base_radius = to_double(value, key);
        else if (key == "patch.rho") cfg.patch.rho = to_double(value, key);
        else if (key == "patch.kappa") cfg.patch.kappa = to_double(value, key);
        else if (key == "patch.alpha") cfg.patch.alpha = to_double(value, key);
        else throw IoError("config: unknown key " + key);
    }
    // adaptive layouts default to the wider contour sampling step
    if (cfg.placement == PlacementMode::adaptive && !spacing_set) cfg.patch.spacing = 10.0;
    return cfg;
}

std::map<std::string, std::string> flatten_json(const nlohmann::json& j) {
    std::map<std::string, std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_object()) {
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
                out[it.key() + "." + jt.key()] = jt.value().is_string()
                                                     ? jt.value().get<std::string>()
                                                     : jt.value().dump();
        } else {
            out[it.key()] =
                it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        }
    }
    return out;
}

}  // namespace

RegistrationConfig parse_registration_config(const std::string& text, bool is_toml) {
    if (is_toml) return from_pairs(parse_toml_pairs(text));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("config: JSON parse error: ") + e.what());
    }
    return from_pairs(flatten_json(j));
}

RegistrationConfig load_registration_config(const std::string& path) {
    std::string text = read_file(path);
    bool is_toml;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        is_toml = false;
    } else if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") {
        is_toml = true;
    } else {
        // sniff: JSON starts with '{'
        size_t b = text.find_first_not_of(" \t\r\n");
        is_toml = (b == std::string::npos || text[b] != '{');
    }
    return parse_registration_config(text, is_toml);
}

std::string config_json(const RegistrationConfig& config) {
    nlohmann::json j;
    j["lambda"] = config.lambda;
    j["basis_order"] = config.basis_order;
    j["placement"] = to_string(config.placement);
    j["pyramid_levels"] = config.pyramid_levels;
    j["max_iters"] = config.max_iters;
    j["grad_tol"] = config.grad_tol;
    j["energy_rel_tol"] = config.energy_rel_tol;
    j["edge_threshold"] = config.edge_threshold;
    j["patch"] = {{"spacing", config.patch.spacing},
                  {"base_radius", config.patch.base_radius},
                  {"rho", config.patch.rho},
                  {"kappa", config.patch.kappa},
                  {"alpha", config.patch.alpha}};
    return j.dump(2) + "\n";
}

}  // namespace meshreg
