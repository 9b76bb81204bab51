#pragma once
// Core domain types shared by every pipeline stage.

#include <cctype>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace secretsift {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Secret types

enum class SecretType {
    Aws,
    GitHub,
    Huggingface,
    Jdbc,
    MongoDb,
    OpenAi,
    PostgreSql,
    PrivateKey,
    Redis,
    Uri,
};

inline constexpr SecretType kAllSecretTypes[] = {
    SecretType::Aws,        SecretType::GitHub, SecretType::Huggingface,
    SecretType::Jdbc,       SecretType::MongoDb, SecretType::OpenAi,
    SecretType::PostgreSql, SecretType::PrivateKey, SecretType::Redis,
    SecretType::Uri,
};

inline std::string to_string(SecretType t) {
    switch (t) {
        case SecretType::Aws: return "AWS";
        case SecretType::GitHub: return "GitHub";
        case SecretType::Huggingface: return "Huggingface";
        case SecretType::Jdbc: return "JDBC";
        case SecretType::MongoDb: return "MongoDB";
        case SecretType::OpenAi: return "OpenAI";
        case SecretType::PostgreSql: return "PostgreSQL";
        case SecretType::PrivateKey: return "PrivateKey";
        case SecretType::Redis: return "Redis";
        case SecretType::Uri: return "URI";
    }
    return "URI";
}

inline std::optional<SecretType> secret_type_from_string(std::string_view s) {
    for (SecretType t : kAllSecretTypes) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// File kinds

enum class FileKind { Code, Document, Config, Data, KeyMaterial };

inline std::string to_string(FileKind k) {
    switch (k) {
        case FileKind::Code: return "code";
        case FileKind::Document: return "document";
        case FileKind::Config: return "config";
        case FileKind::Data: return "data";
        case FileKind::KeyMaterial: return "key_material";
    }
    return "code";
}

inline std::optional<FileKind> file_kind_from_string(std::string_view s) {
    if (s == "code") return FileKind::Code;
    if (s == "document") return FileKind::Document;
    if (s == "config") return FileKind::Config;
    if (s == "data") return FileKind::Data;
    if (s == "key_material") return FileKind::KeyMaterial;
    return std::nullopt;
}

/// Maps a repo-relative path to the kind of file it names. Total: unknown
/// extensions and extensionless names classify as code.
inline FileKind classify_file_kind(std::string_view path) {
    // Final path component.
    const auto slash = path.find_last_of("/\\");
    std::string_view name = (slash == std::string_view::npos) ? path : path.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    if (dot == std::string_view::npos) return FileKind::Code;
    std::string ext;
    for (char c : name.substr(dot + 1)) ext.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

    static const std::set<std::string> kDocument = {"md", "txt", "rst", "adoc"};
    static const std::set<std::string> kConfig = {"env",  "json", "yaml", "yml", "toml",
                                                  "ini",  "properties", "conf", "ipynb"};
    static const std::set<std::string> kKeyMaterial = {"pem", "key", "crt", "p12"};
    static const std::set<std::string> kData = {"csv", "tsv", "sqlite", "db"};

    if (kDocument.count(ext)) return FileKind::Document;
    if (kConfig.count(ext)) return FileKind::Config;
    if (kKeyMaterial.count(ext)) return FileKind::KeyMaterial;
    if (kData.count(ext)) return FileKind::Data;
    return FileKind::Code;
}

// ---------------------------------------------------------------------------
// Locations and candidates

struct ByteSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const ByteSpan&) const = default;
    auto operator<=>(const ByteSpan&) const = default;
};

struct SourceLocation {
    std::string file_path;  // repo-relative, '/'-separated
    std::size_t line = 1;   // 1-based
    ByteSpan byte_span;

    bool operator==(const SourceLocation&) const = default;
};

struct ContextWindow {
    std::string before;
    std::string after;
    FileKind file_kind = FileKind::Code;

    bool operator==(const ContextWindow&) const = default;
};

struct CandidateSecret {
    std::string id;
    SecretType secret_type = SecretType::Uri;
    std::string raw_value;
    SourceLocation location;
    ContextWindow context;
    double entropy_bits = 0.0;
    std::string detector_rule;

    bool operator==(const CandidateSecret&) const = default;
};

// FNV-1a, used for candidate ids and transcript digests. Stable across
// platforms and runs.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string to_hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

/// Deterministic candidate id: hash of (path, span, type).
inline std::string compute_candidate_id(std::string_view file_path, ByteSpan span, SecretType t) {
    std::string key;
    key.append(file_path);
    key.push_back('|');
    key.append(std::to_string(span.start));
    key.push_back(':');
    key.append(std::to_string(span.end));
    key.push_back('|');
    key.append(to_string(t));
    return to_hex64(fnv1a64(key));
}

inline std::string digest_of(std::string_view s) { return "fnv1a:" + to_hex64(fnv1a64(s)); }

// ---------------------------------------------------------------------------
// Verdicts

enum class Classification { TrueLeak, FalsePositive, Undetermined };

inline std::string to_string(Classification c) {
    switch (c) {
        case Classification::TrueLeak: return "true_leak";
        case Classification::FalsePositive: return "false_positive";
        case Classification::Undetermined: return "undetermined";
    }
    return "undetermined";
}

inline std::optional<Classification> classification_from_string(std::string_view s) {
    if (s == "true_leak") return Classification::TrueLeak;
    if (s == "false_positive") return Classification::FalsePositive;
    if (s == "undetermined") return Classification::Undetermined;
    return std::nullopt;
}

enum class Confidence { High, Low };

inline std::string to_string(Confidence c) { return c == Confidence::High ? "high" : "low"; }

/// Shared three-way conclusion vocabulary for check-agent reports.
enum class Indication { Genuine, FalsePositiveIndicated, Unclear };

inline std::string to_string(Indication s) {
    switch (s) {
        case Indication::Genuine: return "genuine";
        case Indication::FalsePositiveIndicated: return "false_positive_indicated";
        case Indication::Unclear: return "unclear";
    }
    return "unclear";
}

inline std::optional<Indication> indication_from_string(std::string_view s) {
    if (s == "genuine") return Indication::Genuine;
    if (s == "false_positive_indicated") return Indication::FalsePositiveIndicated;
    if (s == "unclear") return Indication::Unclear;
    return std::nullopt;
}

struct Verdict {
    std::string candidate_id;
    Classification classification = Classification::Undetermined;
    Confidence confidence = Confidence::Low;
    std::vector<std::string> reasons;
    std::set<int> levels_used;
    json pool_snapshot;  // serialized MemoryPool

    bool operator==(const Verdict&) const = default;
};

// ---------------------------------------------------------------------------
// JSON serialization (stable lowercase snake-case field names)

inline json to_json(const CandidateSecret& c) {
    return json{
        {"id", c.id},
        {"secret_type", to_string(c.secret_type)},
        {"raw_value", c.raw_value},
        {"location",
         {{"file_path", c.location.file_path},
          {"line", c.location.line},
          {"byte_span", {{"start", c.location.byte_span.start}, {"end", c.location.byte_span.end}}}}},
        {"context",
         {{"before", c.context.before},
          {"after", c.context.after},
          {"file_kind", to_string(c.context.file_kind)}}},
        {"entropy_bits", c.entropy_bits},
        {"detector_rule", c.detector_rule},
    };
}

inline CandidateSecret candidate_from_json(const json& j) {
    CandidateSecret c;
    c.id = j.at("id").get<std::string>();
    c.secret_type = secret_type_from_string(j.at("secret_type").get<std::string>()).value();
    c.raw_value = j.at("raw_value").get<std::string>();
    const auto& loc = j.at("location");
    c.location.file_path = loc.at("file_path").get<std::string>();
    c.location.line = loc.at("line").get<std::size_t>();
    c.location.byte_span.start = loc.at("byte_span").at("start").get<std::size_t>();
    c.location.byte_span.end = loc.at("byte_span").at("end").get<std::size_t>();
    const auto& ctx = j.at("context");
    c.context.before = ctx.at("before").get<std::string>();
    c.context.after = ctx.at("after").get<std::string>();
    c.context.file_kind = file_kind_from_string(ctx.at("file_kind").get<std::string>()).value();
    c.entropy_bits = j.at("entropy_bits").get<double>();
    c.detector_rule = j.at("detector_rule").get<std::string>();
    return c;
}

inline json to_json(const Verdict& v) {
    json levels = json::array();
    for (int l : v.levels_used) levels.push_back(l);
    return json{
        {"candidate_id", v.candidate_id},
        {"classification", to_string(v.classification)},
        {"confidence", to_string(v.confidence)},
        {"reasons", v.reasons},
        {"levels_used", levels},
        {"pool_snapshot", v.pool_snapshot},
    };
}

inline Verdict verdict_from_json(const json& j) {
    Verdict v;
    v.candidate_id = j.at("candidate_id").get<std::string>();
    v.classification = classification_from_string(j.at("classification").get<std::string>()).value();
    v.confidence = j.at("confidence").get<std::string>() == "high" ? Confidence::High : Confidence::Low;
    v.reasons = j.at("reasons").get<std::vector<std::string>>();
    for (const auto& l : j.at("levels_used")) v.levels_used.insert(l.get<int>());
    v.pool_snapshot = j.at("pool_snapshot");
    return v;
}

}  // namespace secretsift
