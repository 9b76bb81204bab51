#pragma once
// Evaluation harness: labeled-manifest loading, verdict/label matching,
// metric computation with per-type and per-language breakdowns, and
// cost/time accounting.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "secretsift/backend.hpp"
#include "secretsift/core.hpp"
#include "secretsift/fsutil.hpp"

namespace secretsift {

// ---------------------------------------------------------------------------
// Manifest

enum class Label { TrueLeakLabel, FalsePositiveLabel };

inline std::string to_string(Label l) {
    return l == Label::TrueLeakLabel ? "true_leak" : "false_positive";
}

struct ManifestEntry {
    std::string repo_path;
    std::string file;
    SecretType secret_type = SecretType::Uri;
    Label label = Label::FalsePositiveLabel;
    std::optional<std::string> language_group;
};

struct LabeledManifest {
    std::vector<ManifestEntry> entries;
};

/// Loads a line-delimited JSON manifest. Duplicate (repo, file, type) keys
/// and schema violations are hard errors naming the offending lines.
inline LabeledManifest load_manifest(const fs::path& path) {
    const auto text = read_file(path, static_cast<std::size_t>(64) * 1024 * 1024);
    if (!text) throw std::runtime_error("cannot read manifest: " + path.string());

    LabeledManifest manifest;
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> seen;
    std::istringstream in(*text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) + ": not a JSON object");
        }
        for (const char* field : {"repo_path", "file", "secret_type", "label"}) {
            if (!rec.contains(field) || !rec[field].is_string()) {
                throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                         ": missing string field '" + field + "'");
            }
        }
        ManifestEntry e;
        e.repo_path = rec["repo_path"].get<std::string>();
        e.file = rec["file"].get<std::string>();
        const std::string type_name = rec["secret_type"].get<std::string>();
        const auto type = secret_type_from_string(type_name);
        if (!type) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) +
                                     ": unknown secret_type '" + type_name + "'");
        }
        e.secret_type = *type;
        const std::string label = rec["label"].get<std::string>();
        if (label == "true_leak") e.label = Label::TrueLeakLabel;
        else if (label == "false_positive") e.label = Label::FalsePositiveLabel;
        else {
            throw std::runtime_error("manifest line " + std::to_string(lineno) + ": unknown label '" +
                                     label + "'");
        }
        if (rec.contains("language_group") && rec["language_group"].is_string()) {
            e.language_group = rec["language_group"].get<std::string>();
        }
        const auto key = std::make_tuple(e.repo_path, e.file, type_name);
        if (auto it = seen.find(key); it != seen.end()) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) + ": duplicate of line " +
                                     std::to_string(it->second) + " (" + e.repo_path + ", " + e.file +
                                     ", " + type_name + ")");
        }
        seen.emplace(key, lineno);
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// Metrics

struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct MetricValues {
    double accuracy = 0.0;
    std::optional<double> precision;  // undefined when tp+fp == 0
    std::optional<double> recall;     // undefined when tp+fn == 0
    std::optional<double> f1;

    bool operator==(const MetricValues&) const = default;
};

inline MetricValues metrics_from_counts(const ConfusionCounts& c) {
    MetricValues m;
    const std::uint64_t total = c.total();
    m.accuracy = total == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

struct EvalMetrics {
    ConfusionCounts counts;
    MetricValues values;
    std::map<std::string, ConfusionCounts> by_secret_type;
    std::map<std::string, ConfusionCounts> by_language;
    std::vector<std::string> extra_findings;  // verdicts with no manifest entry

    bool operator==(const EvalMetrics&) const = default;
};

/// One scored finding: the classification the pipeline assigned to a
/// (repo, file, secret_type) key.
struct ScoredFinding {
    std::string repo_path;
    std::string file;
    SecretType secret_type = SecretType::Uri;
    Classification classification = Classification::Undetermined;
};

enum class UndeterminedPolicy {
    CountAgainst,  // Undetermined scores against the tool; extras reported apart
    Strict,        // additionally, extra findings count as false positives
};

/// Joins findings with manifest labels on (repo, file, secret_type) and
/// fills the confusion matrix. A manifest entry with no finding counts as a
/// miss for positives and a correct rejection for negatives.
inline EvalMetrics match_and_score(const std::vector<ScoredFinding>& findings,
                                   const LabeledManifest& manifest,
                                   UndeterminedPolicy policy = UndeterminedPolicy::CountAgainst) {
    EvalMetrics metrics;

    std::map<std::tuple<std::string, std::string, SecretType>, Classification> predictions;
    for (const auto& f : findings) {
        const auto key = std::make_tuple(f.repo_path, f.file, f.secret_type);
        auto [it, inserted] = predictions.emplace(key, f.classification);
        if (!inserted) {
            // Multiple candidates on one key: a confirmed leak dominates,
            // then Undetermined, then FalsePositive.
            auto rank = [](Classification c) {
                switch (c) {
                    case Classification::TrueLeak: return 2;
                    case Classification::Undetermined: return 1;
                    case Classification::FalsePositive: return 0;
                }
                return 0;
            };
            if (rank(f.classification) > rank(it->second)) it->second = f.classification;
        }
    }

    std::set<std::tuple<std::string, std::string, SecretType>> matched;
    for (const auto& e : manifest.entries) {
        const auto key = std::make_tuple(e.repo_path, e.file, e.secret_type);
        matched.insert(key);
        const auto pred = predictions.find(key);
        const bool positive_label = e.label == Label::TrueLeakLabel;
        Classification c = Classification::FalsePositive;  // absent -> not flagged
        if (pred != predictions.end()) c = pred->second;
        if (c == Classification::Undetermined) {
            // Default policy: count against the tool on both sides.
            c = positive_label ? Classification::FalsePositive : Classification::TrueLeak;
        }

        ConfusionCounts delta;
        if (c == Classification::TrueLeak) {
            (positive_label ? delta.tp : delta.fp) = 1;
        } else {
            (positive_label ? delta.fn : delta.tn) = 1;
        }
        metrics.counts.tp += delta.tp;
        metrics.counts.fp += delta.fp;
        metrics.counts.fn += delta.fn;
        metrics.counts.tn += delta.tn;
        auto add = [&delta](ConfusionCounts& c2) {
            c2.tp += delta.tp;
            c2.fp += delta.fp;
            c2.fn += delta.fn;
            c2.tn += delta.tn;
        };
        add(metrics.by_secret_type[to_string(e.secret_type)]);
        add(metrics.by_language[e.language_group.value_or("ungrouped")]);
    }

    for (const auto& [key, classification] : predictions) {
        if (matched.count(key)) continue;
        const auto& [repo, file, type] = key;
        metrics.extra_findings.push_back(repo + ":" + file + ":" + to_string(type) + " -> " +
                                         to_string(classification));
        if (policy == UndeterminedPolicy::Strict && classification != Classification::FalsePositive) {
            metrics.counts.fp += 1;
            metrics.by_secret_type[to_string(type)].fp += 1;
            metrics.by_language["ungrouped"].fp += 1;
        }
    }
    std::sort(metrics.extra_findings.begin(), metrics.extra_findings.end());

    metrics.values = metrics_from_counts(metrics.counts);
    return metrics;
}

// ---------------------------------------------------------------------------
// Report rendering

namespace detail {

inline std::string pct(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", *v * 100.0);
    return buf;
}

inline std::string num(double v, const char* fmt = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

inline json group_to_json(const std::map<std::string, ConfusionCounts>& groups) {
    json out = json::object();
    for (const auto& [name, counts] : groups) {
        const MetricValues v = metrics_from_counts(counts);
        json g{{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn},
               {"accuracy", v.accuracy}};
        g["precision"] = v.precision ? json(*v.precision) : json(nullptr);
        g["recall"] = v.recall ? json(*v.recall) : json(nullptr);
        g["f1"] = v.f1 ? json(*v.f1) : json(nullptr);
        out[name] = g;
    }
    return out;
}

}  // namespace detail

inline json report_json(const EvalMetrics& metrics, const CostReport& cost,
                        const std::string& levels = "123") {
    json j{{"schema_version", kSchemaVersion},
           {"tool_version", kToolVersion},
           {"levels", levels},
           {"metrics",
            {{"tp", metrics.counts.tp},
             {"fp", metrics.counts.fp},
             {"fn", metrics.counts.fn},
             {"tn", metrics.counts.tn},
             {"accuracy", metrics.values.accuracy}}},
           {"cost",
            {{"total_requests", cost.total_requests},
             {"prompt_tokens", cost.prompt_tokens},
             {"completion_tokens", cost.completion_tokens},
             {"total_dollars", cost.estimated_dollars},
             {"avg_dollars", 0.0},
             {"total_minutes", cost.wall_seconds / 60.0},
             {"avg_minutes", 0.0}}}};
    j["metrics"]["precision"] = metrics.values.precision ? json(*metrics.values.precision) : json(nullptr);
    j["metrics"]["recall"] = metrics.values.recall ? json(*metrics.values.recall) : json(nullptr);
    j["metrics"]["f1"] = metrics.values.f1 ? json(*metrics.values.f1) : json(nullptr);
    j["metrics"]["by_secret_type"] = detail::group_to_json(metrics.by_secret_type);
    j["metrics"]["by_language"] = detail::group_to_json(metrics.by_language);
    j["metrics"]["extra_findings"] = metrics.extra_findings;
    return j;
}

/// Renders the metrics/cost report. `unit_count` scales the averages (repos
/// scanned for a bench run).
inline json report_json_with_units(const EvalMetrics& metrics, const CostReport& cost,
                                   std::size_t unit_count, const std::string& levels = "123") {
    json j = report_json(metrics, cost, levels);
    if (unit_count > 0) {
        j["cost"]["avg_dollars"] = cost.estimated_dollars / static_cast<double>(unit_count);
        j["cost"]["avg_minutes"] = cost.wall_seconds / 60.0 / static_cast<double>(unit_count);
    }
    j["cost"]["unit_count"] = unit_count;
    return j;
}

inline std::string render_report_text(const json& report) {
    std::ostringstream out;
    const auto& m = report.at("metrics");
    auto fmt_opt = [](const json& v) -> std::string {
        if (v.is_null()) return "n/a";
        return detail::pct(v.get<double>());
    };
    out << "== evaluation report (levels " << report.value("levels", std::string("123")) << ") ==\n";
    out << "confusion  tp=" << m.at("tp").get<std::uint64_t>() << " fp=" << m.at("fp").get<std::uint64_t>()
        << " fn=" << m.at("fn").get<std::uint64_t>() << " tn=" << m.at("tn").get<std::uint64_t>() << "\n";
    out << "accuracy   " << detail::pct(m.at("accuracy").get<double>()) << "\n";
    out << "precision  " << fmt_opt(m.at("precision")) << "\n";
    out << "recall     " << fmt_opt(m.at("recall")) << "\n";
    out << "f1         " << (m.at("f1").is_null() ? "n/a" : detail::num(m.at("f1").get<double>())) << "\n";

    for (const char* section : {"by_secret_type", "by_language"}) {
        if (!m.contains(section) || m.at(section).empty()) continue;
        out << "\n-- " << section << " --\n";
        out << "  group                 tp   fp   fn   tn   accuracy\n";
        for (const auto& [name, g] : m.at(section).items()) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "  %-20s %4llu %4llu %4llu %4llu   %s\n", name.c_str(),
                          static_cast<unsigned long long>(g.at("tp").get<std::uint64_t>()),
                          static_cast<unsigned long long>(g.at("fp").get<std::uint64_t>()),
                          static_cast<unsigned long long>(g.at("fn").get<std::uint64_t>()),
                          static_cast<unsigned long long>(g.at("tn").get<std::uint64_t>()),
                          detail::pct(g.at("accuracy").get<double>()).c_str());
            out << buf;
        }
    }

    const auto& c = report.at("cost");
    out << "\n-- cost --\n";
    out << "requests         " << c.at("total_requests").get<std::uint64_t>() << "\n";
    out << "prompt tokens    " << c.at("prompt_tokens").get<std::uint64_t>() << "\n";
    out << "completion tokens " << c.at("completion_tokens").get<std::uint64_t>() << "\n";
    out << "total cost ($)   " << detail::num(c.at("total_dollars").get<double>()) << "\n";
    out << "avg cost ($)     " << detail::num(c.at("avg_dollars").get<double>()) << "\n";
    out << "total time (min) " << detail::num(c.at("total_minutes").get<double>(), "%.2f") << "\n";
    out << "avg time (min)   " << detail::num(c.at("avg_minutes").get<double>(), "%.2f") << "\n";
    if (m.contains("extra_findings") && !m.at("extra_findings").empty()) {
        out << "\n-- extra findings (not in manifest) --\n";
        for (const auto& e : m.at("extra_findings")) out << "  " << e.get<std::string>() << "\n";
    }
    return out.str();
}

/// Parses a JSON report back into EvalMetrics (round-trip support).
inline EvalMetrics metrics_from_report_json(const json& report) {
    EvalMetrics metrics;
    const auto& m = report.at("metrics");
    metrics.counts = {m.at("tp").get<std::uint64_t>(), m.at("fp").get<std::uint64_t>(),
                      m.at("fn").get<std::uint64_t>(), m.at("tn").get<std::uint64_t>()};
    auto read_groups = [](const json& src, std::map<std::string, ConfusionCounts>& dst) {
        for (const auto& [name, g] : src.items()) {
            dst[name] = {g.at("tp").get<std::uint64_t>(), g.at("fp").get<std::uint64_t>(),
                         g.at("fn").get<std::uint64_t>(), g.at("tn").get<std::uint64_t>()};
        }
    };
    read_groups(m.at("by_secret_type"), metrics.by_secret_type);
    read_groups(m.at("by_language"), metrics.by_language);
    for (const auto& e : m.at("extra_findings")) metrics.extra_findings.push_back(e.get<std::string>());
    metrics.values = metrics_from_counts(metrics.counts);
    return metrics;
}

}  // namespace secretsift
