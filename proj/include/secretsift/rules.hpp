#pragma once
// Detector rules: the broad per-type screening patterns and the strict
// per-type validators, sharing one line-oriented file grammar:
//
//   <name> <secret_type> <min_entropy|-> <pattern to end of line>
//
// Blank lines and lines starting with '#' are ignored.

#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "secretsift/core.hpp"

namespace secretsift {

struct DetectorRule {
    std::string name;
    SecretType secret_type = SecretType::Uri;
    std::string broad_pattern;
    std::optional<double> min_entropy_bits;

    bool operator==(const DetectorRule&) const = default;
};

/// Compiled form; construction validates that every pattern compiles and
/// names are unique within the set.
class RuleSet {
public:
    explicit RuleSet(std::vector<DetectorRule> rules) : rules_(std::move(rules)) {
        std::set<std::string> names;
        for (const auto& r : rules_) {
            if (!names.insert(r.name).second) {
                throw std::invalid_argument("duplicate rule name: " + r.name);
            }
            try {
                compiled_.emplace_back(r.broad_pattern, std::regex::ECMAScript | std::regex::optimize);
            } catch (const std::regex_error& e) {
                throw std::invalid_argument("rule " + r.name + " does not compile: " + e.what());
            }
        }
    }

    const std::vector<DetectorRule>& rules() const { return rules_; }
    const std::regex& compiled(std::size_t i) const { return compiled_[i]; }

    std::vector<std::size_t> indices_for(SecretType t) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (rules_[i].secret_type == t) out.push_back(i);
        }
        return out;
    }

    bool matches_any(SecretType t, const std::string& s) const {
        for (std::size_t i : indices_for(t)) {
            if (std::regex_search(s, compiled_[i])) return true;
        }
        return false;
    }

private:
    std::vector<DetectorRule> rules_;
    std::vector<std::regex> compiled_;
};

// ---------------------------------------------------------------------------
// Defaults

/// Broad screening rules. Deliberately loose: Level 1 narrows.
inline std::vector<DetectorRule> default_detector_rules() {
    return {
        {"aws-access-key", SecretType::Aws, R"(AKIA[0-9A-Z]{16})", std::nullopt},
        {"github-token", SecretType::GitHub, R"(gh[pousr]_[A-Za-z0-9]{20,})", std::nullopt},
        {"huggingface-token", SecretType::Huggingface, R"(hf_[A-Za-z0-9]{20,})", std::nullopt},
        {"jdbc-url", SecretType::Jdbc, R"(jdbc:[a-z0-9]+://\S+)", std::nullopt},
        {"mongodb-url", SecretType::MongoDb, R"(mongodb(\+srv)?://\S+)", std::nullopt},
        {"openai-key", SecretType::OpenAi, R"(sk-[A-Za-z0-9_-]{16,})", std::nullopt},
        {"postgresql-url", SecretType::PostgreSql, R"(postgres(ql)?://\S+)", std::nullopt},
        {"private-key-block", SecretType::PrivateKey,
         R"(-----BEGIN (?:[A-Z]+ )*PRIVATE KEY-----(?:\r?\n[A-Za-z0-9+/=]+)+\r?\n-----END (?:[A-Z]+ )*PRIVATE KEY-----)",
         std::nullopt},
        {"redis-url", SecretType::Redis, R"(redis://\S+)", std::nullopt},
        {"credentialed-uri", SecretType::Uri, R"([a-z][a-z0-9+.-]*://[^/\s:@]+:[^/\s:@]+@\S+)",
         std::nullopt},
    };
}

/// Strict per-type validators (strict ⊆ broad). Full-string matches.
inline std::vector<DetectorRule> default_strict_rules() {
    return {
        {"aws-strict", SecretType::Aws, R"(AKIA[0-9A-Z]{16})", std::nullopt},
        {"github-strict", SecretType::GitHub, R"(gh[pousr]_[A-Za-z0-9]{36})", std::nullopt},
        {"huggingface-strict", SecretType::Huggingface, R"(hf_[A-Za-z0-9]{30,})", std::nullopt},
        {"jdbc-strict", SecretType::Jdbc,
         R"(jdbc:[a-z0-9]+://(?:[^/\s:@]+:[^/\s:@]+@\S+|\S+[?&;](?:user|username)=[^&;\s]+[&;]password=[^&;\s]+\S*))",
         std::nullopt},
        {"mongodb-strict", SecretType::MongoDb, R"(mongodb(\+srv)?://[^/\s:@]+:[^/\s:@]+@[^\s@]+)",
         std::nullopt},
        {"openai-strict", SecretType::OpenAi, R"(sk-[A-Za-z0-9_-]{16,})", std::nullopt},
        {"postgresql-strict", SecretType::PostgreSql,
         R"(postgres(ql)?://[^/\s:@]+:[^/\s:@]+@[^\s@]+)", std::nullopt},
        {"private-key-strict", SecretType::PrivateKey,
         R"(-----BEGIN ((?:[A-Z]+ )*)PRIVATE KEY-----(?:\r?\n[A-Za-z0-9+/=]+)+\r?\n-----END \1PRIVATE KEY-----\r?\n?)",
         std::nullopt},
        {"redis-strict", SecretType::Redis, R"(redis://[^/\s:@]*:[^/\s:@]+@[^\s@]+)", std::nullopt},
        {"uri-strict", SecretType::Uri, R"([a-z][a-z0-9+.-]*://[^/\s:@]+:[^/\s:@]+@\S+)",
         std::nullopt},
    };
}

// ---------------------------------------------------------------------------
// File grammar

inline std::string render_rules_file(const std::vector<DetectorRule>& rules, std::string_view title) {
    std::ostringstream out;
    out << "# " << title << "\n";
    out << "# grammar: <name> <secret_type> <min_entropy|-> <pattern>\n";
    for (const auto& r : rules) {
        out << r.name << ' ' << to_string(r.secret_type) << ' ';
        if (r.min_entropy_bits) out << *r.min_entropy_bits;
        else out << '-';
        out << ' ' << r.broad_pattern << "\n";
    }
    return out.str();
}

inline std::vector<DetectorRule> parse_rules_text(const std::string& text) {
    std::vector<DetectorRule> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        DetectorRule r;
        std::string type_name, entropy_field;
        if (!(fields >> r.name >> type_name >> entropy_field)) {
            throw std::runtime_error("rules file line " + std::to_string(lineno) + ": expected 4 fields");
        }
        auto t = secret_type_from_string(type_name);
        if (!t) {
            throw std::runtime_error("rules file line " + std::to_string(lineno) +
                                     ": unknown secret type '" + type_name + "'");
        }
        r.secret_type = *t;
        if (entropy_field != "-") r.min_entropy_bits = std::stod(entropy_field);
        std::getline(fields >> std::ws, r.broad_pattern);
        if (r.broad_pattern.empty()) {
            throw std::runtime_error("rules file line " + std::to_string(lineno) + ": empty pattern");
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace secretsift
