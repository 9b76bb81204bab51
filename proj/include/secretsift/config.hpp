#pragma once
// Scan configuration: one structured JSON file with documented keys; CLI
// flags override file values. See README for the key reference.

#include <map>
#include <optional>
#include <set>
#include <string>

#include "secretsift/backend.hpp"
#include "secretsift/core.hpp"
#include "secretsift/fsutil.hpp"
#include "secretsift/orchestrator.hpp"
#include "secretsift/rules.hpp"
#include "secretsift/screener.hpp"

namespace secretsift {

enum class BackendKind { Deterministic, Http };

struct ScanConfig {
    // Screener
    int window_lines = 3;
    std::size_t max_file_bytes = kDefaultMaxFileBytes;
    std::map<SecretType, double> min_entropy;  // per-type overrides
    std::set<std::string> disabled_rules;
    std::map<std::string, SecretType> alias_table = default_alias_table();

    // Backend
    BackendKind backend = BackendKind::Deterministic;
    HttpBackendConfig http;
    std::string price_table_path;
    PriceTable prices;

    // Orchestration
    int max_iterations = 4;
    int levels = 123;  // 1 | 12 | 123
    bool redact = false;
    unsigned jobs = 0;  // 0 = hardware concurrency

    // Output
    std::string format = "json";  // json | text
    std::string dump_graph_path;
    std::optional<double> min_f1;

    ScanOptions screener_options() const {
        ScanOptions o;
        o.window_lines = window_lines;
        o.max_file_bytes = max_file_bytes;
        o.min_entropy_override = min_entropy;
        o.disabled_rules = disabled_rules;
        o.jobs = jobs;
        return o;
    }

    VerifyLimits verify_limits() const {
        VerifyLimits l;
        l.max_iterations = max_iterations;
        l.allow_level2 = levels >= 12;
        l.allow_level3 = levels >= 123;
        return l;
    }

    void validate() const {
        if (window_lines <= 0) throw std::invalid_argument("window_lines must be positive");
        if (max_file_bytes == 0) throw std::invalid_argument("max_file_bytes must be positive");
        if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
        if (levels != 1 && levels != 12 && levels != 123) {
            throw std::invalid_argument("levels must be one of 1, 12, 123");
        }
        if (format != "json" && format != "text") {
            throw std::invalid_argument("format must be json or text");
        }
        if (backend == BackendKind::Http && http.endpoint.empty()) {
            throw std::invalid_argument("http backend requires an endpoint");
        }
        for (const auto& [type, bits] : min_entropy) {
            if (bits < 0) throw std::invalid_argument("min_entropy for " + to_string(type) + " is negative");
        }
    }
};

/// Merges keys from a JSON config file into `config`. Unknown keys are an
/// error so typos never pass silently.
inline void apply_config_json(const json& j, ScanConfig& config) {
    for (const auto& [key, value] : j.items()) {
        if (key == "window_lines") config.window_lines = value.get<int>();
        else if (key == "max_file_bytes") config.max_file_bytes = value.get<std::size_t>();
        else if (key == "max_iterations") config.max_iterations = value.get<int>();
        else if (key == "levels") config.levels = value.is_string() ? std::stoi(value.get<std::string>()) : value.get<int>();
        else if (key == "redact") config.redact = value.get<bool>();
        else if (key == "jobs") config.jobs = value.get<unsigned>();
        else if (key == "format") config.format = value.get<std::string>();
        else if (key == "price_table_path") config.price_table_path = value.get<std::string>();
        else if (key == "backend") {
            const std::string name = value.get<std::string>();
            if (name == "deterministic") config.backend = BackendKind::Deterministic;
            else if (name == "http") config.backend = BackendKind::Http;
            else throw std::invalid_argument("unknown backend '" + name + "'");
        } else if (key == "http") {
            for (const auto& [hk, hv] : value.items()) {
                if (hk == "endpoint") config.http.endpoint = hv.get<std::string>();
                else if (hk == "model") config.http.model = hv.get<std::string>();
                else if (hk == "timeout_ms") config.http.timeout_ms = hv.get<int>();
                else if (hk == "max_retries") config.http.max_retries = hv.get<int>();
                else if (hk == "backoff_base_ms") config.http.backoff_base_ms = hv.get<int>();
                else if (hk == "api_key_env") config.http.api_key_env = hv.get<std::string>();
                else throw std::invalid_argument("unknown config key http." + hk);
            }
        } else if (key == "min_entropy") {
            for (const auto& [type_name, bits] : value.items()) {
                const auto type = secret_type_from_string(type_name);
                if (!type) throw std::invalid_argument("min_entropy: unknown type '" + type_name + "'");
                config.min_entropy[*type] = bits.get<double>();
            }
        } else if (key == "rules") {
            for (const auto& [rule_name, enabled] : value.items()) {
                if (enabled.get<bool>()) config.disabled_rules.erase(rule_name);
                else config.disabled_rules.insert(rule_name);
            }
        } else if (key == "alias_table") {
            for (const auto& [alias, type_name] : value.items()) {
                const auto type = secret_type_from_string(type_name.get<std::string>());
                if (!type) {
                    throw std::invalid_argument("alias_table: unknown type '" +
                                                type_name.get<std::string>() + "'");
                }
                config.alias_table[alias] = *type;
            }
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    }
}

inline ScanConfig load_config_file(const fs::path& path) {
    ScanConfig config;
    const auto text = read_file(path, static_cast<std::size_t>(8) * 1024 * 1024);
    if (!text) throw std::runtime_error("cannot read config file: " + path.string());
    json j = json::parse(*text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error("config file is not a JSON object: " + path.string());
    }
    apply_config_json(j, config);
    return config;
}

inline PriceTable load_price_table(const fs::path& path) {
    const auto text = read_file(path, 1024 * 1024);
    if (!text) throw std::runtime_error("cannot read price table: " + path.string());
    json j = json::parse(*text, nullptr, false);
    if (j.is_discarded() || !j.contains("input_per_1k") || !j.contains("output_per_1k")) {
        throw std::runtime_error("price table needs input_per_1k and output_per_1k: " + path.string());
    }
    return PriceTable{j["input_per_1k"].get<double>(), j["output_per_1k"].get<double>()};
}

}  // namespace secretsift
