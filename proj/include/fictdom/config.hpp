#pragma once

// Strict JSON run configuration: unknown keys and type mismatches are
// rejected before any computation starts.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fictdom/assembly.hpp"

namespace fictdom {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    ProblemSpec spec;
    std::vector<int> n_list;        // refinement levels for the convergence command
    std::vector<double> c_s_list;   // optional stabilization sweep values
    std::string out_dir = ".";
    bool svg = false;
};

inline RunConfig parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

    static const char* known[] = {"problem", "a",    "n",      "c_s",     "multiplier_space",
                                  "kmin",    "kmax", "n_list", "c_s_list"};
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError("config: unknown key '" + item.key() + "'");
    }

    RunConfig cfg;
    try {
        if (j.contains("problem")) cfg.spec.problem_id = j.at("problem").get<std::string>();
        if (j.contains("a")) cfg.spec.a = j.at("a").get<double>();
        if (j.contains("n")) cfg.spec.n = j.at("n").get<int>();
        if (j.contains("c_s")) cfg.spec.c_s = j.at("c_s").get<double>();
        if (j.contains("kmin")) cfg.spec.kmin = j.at("kmin").get<double>();
        if (j.contains("kmax")) cfg.spec.kmax = j.at("kmax").get<double>();
        if (j.contains("multiplier_space")) {
            const std::string s = j.at("multiplier_space").get<std::string>();
            if (s == "fine") {
                cfg.spec.multiplier_space = MultiplierSpace::fine;
            } else if (s == "macro") {
                cfg.spec.multiplier_space = MultiplierSpace::macro;
            } else {
                throw ConfigError("config: multiplier_space must be 'fine' or 'macro'");
            }
        }
        if (j.contains("n_list")) cfg.n_list = j.at("n_list").get<std::vector<int>>();
        if (j.contains("c_s_list")) cfg.c_s_list = j.at("c_s_list").get<std::vector<double>>();
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    try {
        cfg.spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        if (cfg.n_list[i] < 1 || (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1])) {
            throw ConfigError("config: n_list must be strictly increasing positive integers");
        }
    }
    for (double c : cfg.c_s_list) {
        if (!(c >= 0.0)) throw ConfigError("config: c_s_list entries must be >= 0");
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace fictdom
