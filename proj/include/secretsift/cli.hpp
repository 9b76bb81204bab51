#pragma once
// Command implementations behind the CLI binary: scan, verify, bench, and
// report. Kept apart from main() so they can be driven in-process with
// caller-supplied streams.

#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "secretsift/advanced_check.hpp"
#include "secretsift/backend.hpp"
#include "secretsift/basic_check.hpp"
#include "secretsift/bench.hpp"
#include "secretsift/config.hpp"
#include "secretsift/core.hpp"
#include "secretsift/orchestrator.hpp"
#include "secretsift/rules.hpp"
#include "secretsift/screener.hpp"

namespace secretsift {

inline constexpr int kExitClean = 0;
inline constexpr int kExitLeaksFound = 1;
inline constexpr int kExitError = 2;

namespace cli_detail {

inline std::unique_ptr<AnalysisBackend> make_backend(const ScanConfig& config, DebugLog* debug) {
    if (config.backend == BackendKind::Http) {
        return std::make_unique<HttpBackend>(config.http, debug);
    }
    return std::make_unique<DeterministicBackend>();
}

struct Pipeline {
    RuleSet broad{default_detector_rules()};
    RuleSet strict{default_strict_rules()};
    VerifyToolsets toolsets;

    Pipeline() { toolsets.basic.strict_rules = &strict; }
};

/// Replaces each candidate's raw value with its digest inside a string.
inline std::string redact_raws(std::string text, const std::vector<CandidateSecret>& candidates) {
    for (const auto& c : candidates) {
        if (c.raw_value.empty()) continue;
        const std::string digest = digest_of(c.raw_value);
        std::size_t pos = 0;
        while ((pos = text.find(c.raw_value, pos)) != std::string::npos) {
            text.replace(pos, c.raw_value.size(), digest);
            pos += digest.size();
        }
    }
    return text;
}

struct VerifiedFinding {
    CandidateSecret candidate;
    Verdict verdict;
};

/// Verifies candidates concurrently; one independent session per candidate.
inline std::vector<VerifiedFinding> verify_all(const std::vector<CandidateSecret>& candidates,
                                               const ReferenceGraph& graph, AnalysisBackend& backend,
                                               const ScanConfig& config, const Pipeline& pipeline,
                                               const std::string& repo_label,
                                               const std::set<std::string>& unverifiable_ids = {}) {
    std::vector<VerifiedFinding> results(candidates.size());
    const VerifyLimits limits = config.verify_limits();
    parallel_for(candidates.size(), config.jobs, [&](std::size_t i) {
        const CandidateSecret& c = candidates[i];
        results[i].candidate = c;
        if (unverifiable_ids.count(c.id)) {
            Verdict v;
            v.candidate_id = c.id;
            v.classification = Classification::Undetermined;
            v.confidence = Confidence::Low;
            v.reasons = {"source file not found: " + c.location.file_path};
            MemoryPool pool;
            pool.set_facts(json{{"candidate", to_json(c)},
                                {"repo", json{{"root", repo_label}, {"schema_version", kSchemaVersion}}}});
            v.pool_snapshot = pool.to_json();
            results[i].verdict = std::move(v);
            return;
        }
        results[i].verdict = verify_candidate(c, graph, backend, limits, pipeline.toolsets,
                                              default_prompt_templates(), repo_label);
    });
    return results;
}

inline json finding_to_json(const VerifiedFinding& f, bool redact) {
    json candidate = to_json(f.candidate);
    if (redact) {
        candidate.erase("raw_value");
        candidate["raw_digest"] = digest_of(f.candidate.raw_value);
        candidate["context"]["before"] = "";
        candidate["context"]["after"] = "";
    }
    json verdict = to_json(f.verdict);
    if (redact) {
        // Reasons may quote evidence; scrub any verbatim raw value. The pool
        // snapshot is the one sanctioned carrier of the raw value.
        json reasons = json::array();
        for (const auto& r : verdict["reasons"]) {
            reasons.push_back(redact_raws(r.get<std::string>(), {f.candidate}));
        }
        verdict["reasons"] = reasons;
    }
    return json{{"candidate", candidate}, {"verdict", verdict}};
}

inline json scan_report_json(const std::vector<VerifiedFinding>& findings, const std::string& root,
                             const ScanConfig& config, std::size_t warning_count,
                             const std::string& backend_name) {
    json arr = json::array();
    std::size_t leaks = 0, fps = 0, undetermined = 0;
    for (const auto& f : findings) {
        arr.push_back(finding_to_json(f, config.redact));
        switch (f.verdict.classification) {
            case Classification::TrueLeak: ++leaks; break;
            case Classification::FalsePositive: ++fps; break;
            case Classification::Undetermined: ++undetermined; break;
        }
    }
    return json{{"schema_version", kSchemaVersion},
                {"tool_version", kToolVersion},
                {"root", root},
                {"backend", backend_name},
                {"levels", std::to_string(config.levels)},
                {"findings", arr},
                {"summary",
                 {{"candidates", findings.size()},
                  {"true_leak", leaks},
                  {"false_positive", fps},
                  {"undetermined", undetermined}}},
                {"warnings", warning_count}};
}

inline void render_scan_text(const std::vector<VerifiedFinding>& findings, const ScanConfig& config,
                             std::ostream& out) {
    if (findings.empty()) {
        out << "no candidates found\n";
        return;
    }
    for (const auto& f : findings) {
        const auto& c = f.candidate;
        const auto& v = f.verdict;
        std::string shown = config.redact ? digest_of(c.raw_value) : c.raw_value;
        if (shown.size() > 60) shown = shown.substr(0, 57) + "...";
        std::string levels;
        for (int l : v.levels_used) {
            if (!levels.empty()) levels += ",";
            levels += std::to_string(l);
        }
        out << to_string(v.classification) << " [" << to_string(c.secret_type) << "] "
            << c.location.file_path << ":" << c.location.line << " " << shown << " (confidence "
            << to_string(v.confidence) << ", levels {" << levels << "})\n";
        for (const auto& r : v.reasons) {
            out << "    - " << (config.redact ? redact_raws(r, {c}) : r) << "\n";
        }
    }
}

inline int emit_scan_report(const std::vector<VerifiedFinding>& findings, const std::string& root,
                            const ScanConfig& config, const std::vector<std::string>& warnings,
                            const std::string& backend_name, std::ostream& out, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    if (config.format == "json") {
        out << scan_report_json(findings, root, config, warnings.size(), backend_name).dump(2) << "\n";
    } else {
        render_scan_text(findings, config, out);
    }
    for (const auto& f : findings) {
        if (f.verdict.classification == Classification::TrueLeak) return kExitLeaksFound;
    }
    return kExitClean;
}

inline DebugLog* make_debug_log(DebugLog& storage, const ScanConfig& config, std::ostream& err,
                                const std::vector<CandidateSecret>& candidates) {
    if (!std::getenv("SECRETSIFT_DEBUG")) return nullptr;
    storage.sink = &err;
    if (config.redact) {
        storage.redact = [candidates](std::string line) {
            return redact_raws(std::move(line), candidates);
        };
    }
    return &storage;
}

}  // namespace cli_detail

// ---------------------------------------------------------------------------
// scan

inline int cmd_scan(const std::string& root, ScanConfig config, std::ostream& out, std::ostream& err) {
    try {
        config.validate();
        cli_detail::Pipeline pipeline;
        std::vector<std::string> warnings;
        const auto candidates =
            scan_repository(root, pipeline.broad, config.screener_options(), &warnings);

        ReferenceGraph graph;
        if (config.levels >= 123 || !config.dump_graph_path.empty()) {
            ReferenceIndexOptions opts;
            opts.max_file_bytes = config.max_file_bytes;
            opts.jobs = config.jobs;
            graph = build_reference_index(root, opts, &warnings);
        }
        if (!config.dump_graph_path.empty()) {
            std::ofstream dump(config.dump_graph_path);
            if (!dump) throw std::runtime_error("cannot write graph dump: " + config.dump_graph_path);
            dump << graph.to_json().dump(2) << "\n";
        }

        DebugLog debug_storage;
        DebugLog* debug = cli_detail::make_debug_log(debug_storage, config, err, candidates);
        auto backend = cli_detail::make_backend(config, debug);
        const auto findings =
            cli_detail::verify_all(candidates, graph, *backend, config, pipeline, root);
        return cli_detail::emit_scan_report(findings, root, config, warnings, backend->name(), out,
                                            err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------
// verify (ingest external findings, skip screening)

inline int cmd_verify(const std::string& findings_path, const std::string& root, ScanConfig config,
                      std::ostream& out, std::ostream& err) {
    try {
        config.validate();
        cli_detail::Pipeline pipeline;
        IngestResult ingest =
            ingest_external_findings(findings_path, root, config.alias_table, config.screener_options());

        ReferenceGraph graph;
        if (config.levels >= 123 && fs::exists(root)) {
            ReferenceIndexOptions opts;
            opts.max_file_bytes = config.max_file_bytes;
            opts.jobs = config.jobs;
            graph = build_reference_index(root, opts, &ingest.warnings);
        }

        DebugLog debug_storage;
        DebugLog* debug = cli_detail::make_debug_log(debug_storage, config, err, ingest.candidates);
        auto backend = cli_detail::make_backend(config, debug);
        const auto findings = cli_detail::verify_all(ingest.candidates, graph, *backend, config,
                                                     pipeline, root, ingest.missing_file_ids);
        return cli_detail::emit_scan_report(findings, root, config, ingest.warnings, backend->name(),
                                            out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------
// bench

inline int cmd_bench(const std::string& manifest_path, ScanConfig config, std::ostream& out,
                     std::ostream& err) {
    try {
        config.validate();
        const auto started = std::chrono::steady_clock::now();
        const LabeledManifest manifest = load_manifest(manifest_path);
        const fs::path base = fs::path(manifest_path).parent_path();

        std::map<std::string, std::vector<const ManifestEntry*>> repos;
        for (const auto& e : manifest.entries) repos[e.repo_path].push_back(&e);

        cli_detail::Pipeline pipeline;
        DebugLog debug_storage;
        DebugLog* debug = cli_detail::make_debug_log(debug_storage, config, err, {});
        auto backend = cli_detail::make_backend(config, debug);

        std::vector<ScoredFinding> findings;
        std::vector<std::string> skipped;
        std::size_t scanned = 0;
        for (const auto& [repo_path, entries] : repos) {
            fs::path root = fs::path(repo_path);
            if (root.is_relative()) root = base / root;
            std::error_code ec;
            if (!fs::is_directory(root, ec)) {
                skipped.push_back(repo_path);
                err << "warning: repo skipped (not a directory): " << repo_path << "\n";
                continue;
            }
            try {
                std::vector<std::string> warnings;
                const auto candidates =
                    scan_repository(root, pipeline.broad, config.screener_options(), &warnings);
                ReferenceGraph graph;
                if (config.levels >= 123) {
                    ReferenceIndexOptions opts;
                    opts.max_file_bytes = config.max_file_bytes;
                    opts.jobs = config.jobs;
                    graph = build_reference_index(root, opts, &warnings);
                }
                const auto verified = cli_detail::verify_all(candidates, graph, *backend, config,
                                                             pipeline, repo_path);
                for (const auto& f : verified) {
                    findings.push_back({repo_path, f.candidate.location.file_path,
                                        f.candidate.secret_type, f.verdict.classification});
                }
                ++scanned;
            } catch (const std::exception& e) {
                skipped.push_back(repo_path);
                err << "warning: repo skipped (" << e.what() << "): " << repo_path << "\n";
            }
        }

        const EvalMetrics metrics = match_and_score(findings, manifest);
        PriceTable prices = config.prices;
        if (!config.price_table_path.empty()) prices = load_price_table(config.price_table_path);
        CostReport cost = estimate_cost(backend->meter().snapshot(), prices);
        // The report's time columns reflect the harness run, not just the
        // backend's in-request time.
        cost.wall_seconds = std::chrono::duration_cast<std::chrono::duration<double>>(
                                std::chrono::steady_clock::now() - started)
                                .count();

        json report = report_json_with_units(metrics, cost, scanned, std::to_string(config.levels));
        json skipped_json = json::array();
        for (const auto& s : skipped) skipped_json.push_back(s);
        report["repos"] = {{"scanned", scanned}, {"skipped", skipped_json}};

        if (config.format == "json") out << report.dump(2) << "\n";
        else out << render_report_text(report);

        if (config.min_f1) {
            if (!metrics.values.f1 || *metrics.values.f1 < *config.min_f1) return kExitLeaksFound;
        }
        return kExitClean;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

// ---------------------------------------------------------------------------
// report (re-render a saved JSON report as text)

inline int cmd_report(const std::string& report_path, std::ostream& out, std::ostream& err) {
    try {
        const auto text = read_file(report_path, static_cast<std::size_t>(64) * 1024 * 1024);
        if (!text) throw std::runtime_error("cannot read report: " + report_path);
        json report = json::parse(*text, nullptr, false);
        if (report.is_discarded() || !report.contains("metrics")) {
            throw std::runtime_error("not a metrics report: " + report_path);
        }
        out << render_report_text(report);
        return kExitClean;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace secretsift
