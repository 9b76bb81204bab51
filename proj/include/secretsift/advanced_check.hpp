#pragma once
// Level-2 context semantics and Level-3 project reference analysis. Context
// indicators and reference sites are extracted deterministically; the
// backend owns the judgment and the usage synthesis.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "secretsift/backend.hpp"
#include "secretsift/core.hpp"
#include "secretsift/fsutil.hpp"
#include "secretsift/memory_pool.hpp"
#include "secretsift/prompts.hpp"
#include "secretsift/text.hpp"

namespace secretsift {

// ---------------------------------------------------------------------------
// Context assessment

enum class IndicatorKind { DocExample, TestMarker, CommentDisclaimer, ProductionHint };

inline std::string to_string(IndicatorKind k) {
    switch (k) {
        case IndicatorKind::DocExample: return "doc_example";
        case IndicatorKind::TestMarker: return "test_marker";
        case IndicatorKind::CommentDisclaimer: return "comment_disclaimer";
        case IndicatorKind::ProductionHint: return "production_hint";
    }
    return "doc_example";
}

struct ContextIndicator {
    IndicatorKind kind = IndicatorKind::DocExample;
    std::string snippet;
    std::size_t offset = 0;  // into before, or before.size() + offset into after

    bool operator==(const ContextIndicator&) const = default;
};

enum class ContextJudgment { Illustrative, Operational, Insufficient };

inline std::string to_string(ContextJudgment j) {
    switch (j) {
        case ContextJudgment::Illustrative: return "illustrative";
        case ContextJudgment::Operational: return "operational";
        case ContextJudgment::Insufficient: return "insufficient";
    }
    return "insufficient";
}

inline std::optional<ContextJudgment> context_judgment_from_string(std::string_view s) {
    if (s == "illustrative") return ContextJudgment::Illustrative;
    if (s == "operational") return ContextJudgment::Operational;
    if (s == "insufficient") return ContextJudgment::Insufficient;
    return std::nullopt;
}

struct ContextAssessment {
    std::vector<ContextIndicator> indicators;
    ContextJudgment judgment = ContextJudgment::Insufficient;
    std::optional<std::string> error_note;
};

/// Keyword sets for the deterministic indicator extraction. Configurable;
/// defaults cover the common documentation/test/production vocabulary.
struct ContextKeywords {
    std::set<std::string> doc_example = {"example", "sample", "tutorial", "demo",
                                         "replace", "placeholder", "illustration"};
    std::set<std::string> disclaimer_tokens = {"todo", "fixme"};
    std::vector<std::string> disclaimer_phrases = {"do not use", "not for production"};
    std::set<std::string> production_hint = {"client", "connect", "connection", "session",
                                             "auth",   "login",   "credential", "credentials",
                                             "production", "deploy", "request", "api"};
    std::set<std::string> test_markers = {"test", "spec", "fixture", "example",
                                          "demo", "mock", "sample"};
};

inline const ContextKeywords& default_context_keywords() {
    static const ContextKeywords keywords;
    return keywords;
}

/// True when a path component or word token belongs to a marker family:
/// "tests", "test_pay", "pay_test", and "test2" all match "test".
inline bool matches_marker(std::string_view token, const std::set<std::string>& markers) {
    const std::string t = lowercase(token);
    for (const auto& m : markers) {
        if (t == m || t == m + "s") return true;
        if (t.size() > m.size() && t.compare(0, m.size(), m) == 0) {
            const char next = t[m.size()];
            if (next == '_' || next == '-' || next == '.' || std::isdigit(static_cast<unsigned char>(next)))
                return true;
        }
        if (t.size() > m.size() + 1 && t.ends_with("_" + m)) return true;
    }
    return false;
}

namespace detail {

inline void scan_segment(std::string_view text, std::size_t base_offset,
                         const ContextKeywords& kw, std::vector<ContextIndicator>& out) {
    // Token scan with camel splitting keeps "PaymentClient" visible as a
    // production hint without letting "latest" read as a test marker.
    std::size_t pos = 0;
    std::string cur;
    auto flush = [&](std::size_t end_pos) {
        if (cur.empty()) return;
        for (const auto& tok : word_tokens(cur)) {
            const std::size_t off = base_offset + end_pos - cur.size();
            if (kw.doc_example.count(tok) || (tok.size() > 3 && tok.back() == 's' &&
                                              kw.doc_example.count(tok.substr(0, tok.size() - 1)))) {
                out.push_back({IndicatorKind::DocExample, cur, off});
            } else if (kw.disclaimer_tokens.count(tok)) {
                out.push_back({IndicatorKind::CommentDisclaimer, cur, off});
            } else if (kw.production_hint.count(tok)) {
                out.push_back({IndicatorKind::ProductionHint, cur, off});
            }
        }
        cur.clear();
    };
    for (pos = 0; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
            cur.push_back(c);
        } else {
            flush(pos);
        }
    }
    flush(text.size());

    const std::string lower = lowercase(text);
    for (const auto& phrase : kw.disclaimer_phrases) {
        std::size_t at = 0;
        while ((at = lower.find(phrase, at)) != std::string::npos) {
            out.push_back({IndicatorKind::CommentDisclaimer, phrase, base_offset + at});
            at += phrase.size();
        }
    }
}

}  // namespace detail

/// Deterministic indicator extraction over the context window plus the
/// candidate's own path, then a backend call for the judgment.
inline ContextAssessment analyze_context(const CandidateSecret& c, AnalysisBackend& backend,
                                         const PromptTemplates& templates,
                                         const ContextKeywords& keywords = default_context_keywords()) {
    ContextAssessment assessment;
    detail::scan_segment(c.context.before, 0, keywords, assessment.indicators);
    detail::scan_segment(c.context.after, c.context.before.size(), keywords, assessment.indicators);
    for (const auto& component : path_components(c.location.file_path)) {
        for (const auto& tok : word_tokens(component)) {
            if (matches_marker(tok, keywords.test_markers)) {
                assessment.indicators.push_back({IndicatorKind::TestMarker, component, 0});
                break;
            }
        }
    }

    json indicators = json::array();
    for (const auto& ind : assessment.indicators) {
        indicators.push_back(
            {{"kind", to_string(ind.kind)}, {"snippet", ind.snippet}, {"offset", ind.offset}});
    }
    const json evidence{{"stage", "context_judgment"},
                        {"file_kind", to_string(c.context.file_kind)},
                        {"indicators", indicators}};
    const std::string prompt = render_template(
        templates.p_agent, {{"agent", "advanced"},
                            {"key", c.raw_value},
                            {"context", c.context.before + "..." + c.context.after},
                            {"tool_results", "```json\n" + evidence.dump() + "\n```"}});

    const BackendReply reply = backend.complete(prompt);
    if (!reply.ok) {
        assessment.judgment = ContextJudgment::Insufficient;
        assessment.error_note = "backend error: " + reply.error;
        return assessment;
    }
    const auto parsed = extract_first_json_object(reply.text);
    std::optional<ContextJudgment> judgment;
    if (parsed && parsed->contains("judgment") && (*parsed)["judgment"].is_string()) {
        judgment = context_judgment_from_string((*parsed)["judgment"].get<std::string>());
    }
    if (!judgment) {
        assessment.judgment = ContextJudgment::Insufficient;
        assessment.error_note = "backend reply carried no usable judgment";
        return assessment;
    }
    assessment.judgment = *judgment;
    return assessment;
}

// ---------------------------------------------------------------------------
// Reference graph

struct SiteLoc {
    std::size_t line = 0;
    std::string snippet;

    bool operator==(const SiteLoc&) const = default;
    auto operator<=>(const SiteLoc&) const = default;
};

/// File-level reference index: edges[referencing][referenced] -> sites where
/// the referencing file mentions the referenced file's basename or stem.
struct ReferenceGraph {
    std::set<std::string> nodes;
    std::map<std::string, std::map<std::string, std::vector<SiteLoc>>> edges;

    bool operator==(const ReferenceGraph&) const = default;

    json to_json() const {
        json adjacency = json::object();
        for (const auto& [from, targets] : edges) {
            json out = json::object();
            for (const auto& [to, sites] : targets) {
                json site_list = json::array();
                for (const auto& s : sites) {
                    site_list.push_back({{"line", s.line}, {"snippet", s.snippet}});
                }
                out[to] = site_list;
            }
            adjacency[from] = out;
        }
        json node_list = json::array();
        for (const auto& n : nodes) node_list.push_back(n);
        return json{{"nodes", node_list}, {"edges", adjacency}};
    }
};

namespace detail {

struct Needle {
    std::string text;        // full needle (basename or stem)
    std::string first_word;  // leading word token, the lookup key
    std::string target;      // referenced file
};

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Word tokens of the needle interleaved with exact separators; returns the
/// first word token, or empty if the needle has none.
inline std::string first_word_of(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && !is_word_char(s[b])) ++b;
    std::size_t e = b;
    while (e < s.size() && is_word_char(s[e])) ++e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

struct ReferenceIndexOptions {
    std::size_t max_file_bytes = kDefaultMaxFileBytes;
    std::size_t max_snippet_bytes = 200;
    unsigned jobs = 0;
};

/// Builds the project-wide reference graph: for text files E and F, an edge
/// E -> F exists wherever E contains F's basename or stem as a token
/// (neighbouring characters are not word characters). No self-edges.
inline ReferenceGraph build_reference_index(const fs::path& root,
                                            const ReferenceIndexOptions& options = {},
                                            std::vector<std::string>* warnings = nullptr) {
    ReferenceGraph graph;
    const auto files = walk_tree(root, options.max_file_bytes, warnings);

    std::vector<std::string> contents(files.size());
    std::vector<char> excluded(files.size(), 0);  // 1 = binary, 2 = unreadable
    parallel_for(files.size(), options.jobs, [&](std::size_t i) {
        auto data = read_file(root / files[i], options.max_file_bytes);
        if (!data) {
            excluded[i] = 2;
            return;
        }
        if (looks_binary(*data)) {
            excluded[i] = 1;
            return;
        }
        contents[i] = std::move(*data);
    });

    for (std::size_t i = 0; i < files.size(); ++i) {
        if (excluded[i] == 2 && warnings) warnings->push_back("unreadable, skipped: " + files[i]);
        if (!excluded[i]) graph.nodes.insert(files[i]);
    }

    // Needles keyed by their first word token; only text files are targets.
    std::unordered_multimap<std::string, detail::Needle> needles;
    for (const auto& rel : graph.nodes) {
        const auto slash = rel.find_last_of('/');
        const std::string basename = slash == std::string::npos ? rel : rel.substr(slash + 1);
        const auto dot = basename.find_last_of('.');
        const std::string stem = (dot == std::string::npos || dot == 0) ? basename : basename.substr(0, dot);
        for (const std::string& needle : std::set<std::string>{basename, stem}) {
            const std::string first = detail::first_word_of(needle);
            if (first.empty()) continue;
            needles.emplace(first, detail::Needle{needle, first, rel});
        }
    }

    std::vector<std::map<std::string, std::vector<SiteLoc>>> per_file(files.size());
    parallel_for(files.size(), options.jobs, [&](std::size_t i) {
        if (excluded[i]) return;
        const std::string& content = contents[i];
        const auto starts = line_starts(content);
        std::size_t pos = 0;
        while (pos < content.size()) {
            // Next word token.
            while (pos < content.size() && !detail::is_word_char(content[pos])) ++pos;
            std::size_t end = pos;
            while (end < content.size() && detail::is_word_char(content[end])) ++end;
            if (pos == end) break;
            const std::string token = content.substr(pos, end - pos);
            auto [lo, hi] = needles.equal_range(token);
            for (auto it = lo; it != hi; ++it) {
                const detail::Needle& n = it->second;
                if (n.target == files[i]) continue;  // no self-edges
                if (content.compare(pos, n.text.size(), n.text) != 0) continue;
                const std::size_t after = pos + n.text.size();
                if (after < content.size() && detail::is_word_char(content[after])) continue;
                // Record the site once per (target, line).
                auto line_it = std::upper_bound(starts.begin(), starts.end(), pos);
                const std::size_t line_no = static_cast<std::size_t>(line_it - starts.begin());
                const std::size_t ls = starts[line_no - 1];
                std::size_t le = line_no < starts.size() ? starts[line_no] : content.size();
                while (le > ls && (content[le - 1] == '\n' || content[le - 1] == '\r')) --le;
                std::string snippet =
                    utf8_sanitize(std::string_view(content).substr(ls, le - ls), options.max_snippet_bytes);
                auto& sites = per_file[i][n.target];
                if (sites.empty() || sites.back().line != line_no) {
                    sites.push_back({line_no, std::move(snippet)});
                }
            }
            pos = end;
        }
    });

    for (std::size_t i = 0; i < files.size(); ++i) {
        if (!per_file[i].empty()) graph.edges[files[i]] = std::move(per_file[i]);
    }
    return graph;
}

// ---------------------------------------------------------------------------
// Reference assessment

enum class UsageClass { Production, TestOrDemo, Unreferenced };

inline std::string to_string(UsageClass u) {
    switch (u) {
        case UsageClass::Production: return "production";
        case UsageClass::TestOrDemo: return "test_or_demo";
        case UsageClass::Unreferenced: return "unreferenced";
    }
    return "unreferenced";
}

struct ReferenceSite {
    std::string referencing_file;
    std::size_t line = 0;
    std::string snippet;
    bool test_or_demo = false;

    bool operator==(const ReferenceSite&) const = default;
};

struct ReferenceAssessment {
    std::vector<ReferenceSite> sites;
    UsageClass usage = UsageClass::Unreferenced;
    std::optional<ReferenceSite> decisive_site;
    std::optional<std::string> error_note;
};

/// Collects the sites referencing the candidate's file, tags each TestOrDemo
/// or candidate-production by path/snippet keywords, and has the backend
/// synthesize the overall usage. Backend failure falls back to the per-site
/// majority.
inline ReferenceAssessment analyze_references(const CandidateSecret& c, const ReferenceGraph& graph,
                                              AnalysisBackend& backend,
                                              const PromptTemplates& templates,
                                              const ContextKeywords& keywords = default_context_keywords()) {
    ReferenceAssessment assessment;
    for (const auto& [from, targets] : graph.edges) {
        const auto found = targets.find(c.location.file_path);
        if (found == targets.end()) continue;
        bool test_like = false;
        for (const auto& component : path_components(from)) {
            for (const auto& tok : word_tokens(component)) {
                if (matches_marker(tok, keywords.test_markers)) test_like = true;
            }
        }
        for (const auto& site : found->second) {
            ReferenceSite rs{from, site.line, site.snippet, test_like};
            if (!rs.test_or_demo) {
                for (const auto& tok : word_tokens(site.snippet)) {
                    if (matches_marker(tok, keywords.test_markers)) {
                        rs.test_or_demo = true;
                        break;
                    }
                }
            }
            assessment.sites.push_back(std::move(rs));
        }
    }

    if (assessment.sites.empty()) {
        assessment.usage = UsageClass::Unreferenced;
        return assessment;
    }

    json sites = json::array();
    for (const auto& s : assessment.sites) {
        sites.push_back({{"path", s.referencing_file},
                         {"line", s.line},
                         {"snippet", s.snippet},
                         {"test_or_demo", s.test_or_demo}});
    }
    const json evidence{{"stage", "reference_usage"}, {"sites", sites}};
    const std::string prompt = render_template(
        templates.p_agent, {{"agent", "advanced"},
                            {"key", c.raw_value},
                            {"context", c.location.file_path},
                            {"tool_results", "```json\n" + evidence.dump() + "\n```"}});

    auto majority_fallback = [&assessment]() {
        std::size_t prod = 0, test = 0;
        for (const auto& s : assessment.sites) (s.test_or_demo ? test : prod)++;
        assessment.usage = prod >= test ? UsageClass::Production : UsageClass::TestOrDemo;
        if (assessment.usage == UsageClass::Production) {
            for (const auto& s : assessment.sites) {
                if (!s.test_or_demo) {
                    assessment.decisive_site = s;
                    break;
                }
            }
        }
    };

    const BackendReply reply = backend.complete(prompt);
    const auto parsed = reply.ok ? extract_first_json_object(reply.text) : std::nullopt;
    if (!parsed || !parsed->contains("usage") || !(*parsed)["usage"].is_string()) {
        majority_fallback();
        assessment.error_note = reply.ok ? "backend reply carried no usage; deterministic majority used"
                                         : "backend error (" + reply.error +
                                               "); deterministic majority used";
        return assessment;
    }
    const std::string usage = (*parsed)["usage"].get<std::string>();
    if (usage == "production") assessment.usage = UsageClass::Production;
    else if (usage == "test_or_demo") assessment.usage = UsageClass::TestOrDemo;
    else if (usage == "unreferenced") assessment.usage = UsageClass::Unreferenced;
    else {
        majority_fallback();
        assessment.error_note = "backend reply carried an unknown usage; deterministic majority used";
        return assessment;
    }
    if (parsed->contains("decisive_site") && (*parsed)["decisive_site"].is_object()) {
        const auto& d = (*parsed)["decisive_site"];
        ReferenceSite site;
        site.referencing_file = d.value("path", std::string());
        site.line = d.value("line", static_cast<std::size_t>(0));
        site.snippet = d.value("snippet", std::string());
        site.test_or_demo = d.value("test_or_demo", false);
        assessment.decisive_site = site;
    }
    return assessment;
}

// ---------------------------------------------------------------------------
// Agent run

struct AdvancedReport {
    ContextJudgment context_judgment = ContextJudgment::Insufficient;
    std::optional<UsageClass> usage;
    Indication recommendation = Indication::Unclear;
    bool low_confidence = false;
    std::optional<ReferenceSite> decisive_site;
    std::vector<std::string> cited_evidence;
    std::optional<std::string> error_note;
};

inline json to_json(const AdvancedReport& r) {
    json j{{"context_judgment", to_string(r.context_judgment)},
           {"recommendation", to_string(r.recommendation)},
           {"low_confidence", r.low_confidence},
           {"cited_evidence", r.cited_evidence}};
    if (r.usage) j["usage"] = to_string(*r.usage);
    if (r.decisive_site) {
        j["decisive_site"] = {{"path", r.decisive_site->referencing_file},
                              {"line", r.decisive_site->line},
                              {"snippet", r.decisive_site->snippet}};
    }
    if (r.error_note) j["error_note"] = *r.error_note;
    return j;
}

struct AdvancedToolset {
    const ContextKeywords* keywords = &default_context_keywords();
    bool allow_reference_check = true;  // Level 3 gate (ablation)
};

/// Runs the context tool and, only when its judgment is Insufficient, the
/// reference tool. Writes one tier-3 record.
inline AdvancedReport run_advanced_check(const CandidateSecret& c, MemoryPool& pool,
                                         const ReferenceGraph& graph, AnalysisBackend& backend,
                                         const AdvancedToolset& tools,
                                         const PromptTemplates& templates, int iteration) {
    AdvancedReport report;

    const ContextAssessment context = analyze_context(c, backend, templates, *tools.keywords);
    json indicators = json::array();
    for (const auto& ind : context.indicators) {
        indicators.push_back(
            {{"kind", to_string(ind.kind)}, {"snippet", ind.snippet}, {"offset", ind.offset}});
    }
    json context_out{{"judgment", to_string(context.judgment)}, {"indicators", indicators}};
    if (context.error_note) context_out["error_note"] = *context.error_note;
    pool.append_transcript("context_checking", digest_of(c.raw_value), context_out);

    report.context_judgment = context.judgment;
    if (context.error_note) report.error_note = context.error_note;

    switch (context.judgment) {
        case ContextJudgment::Illustrative: {
            report.recommendation = Indication::FalsePositiveIndicated;
            std::string why = "context is illustrative";
            if (!context.indicators.empty()) {
                why += " (indicator: " + context.indicators.front().snippet + ")";
            }
            report.cited_evidence.push_back(why);
            break;
        }
        case ContextJudgment::Operational: {
            report.recommendation = Indication::Genuine;
            report.cited_evidence.push_back("context reads as operational use");
            break;
        }
        case ContextJudgment::Insufficient: {
            report.cited_evidence.push_back("context is insufficient to judge");
            if (!tools.allow_reference_check) {
                report.recommendation = Indication::Genuine;
                report.low_confidence = true;
                report.cited_evidence.push_back(
                    "reference analysis disabled; flagged conservatively");
                break;
            }
            const ReferenceAssessment refs =
                analyze_references(c, graph, backend, templates, *tools.keywords);
            json sites = json::array();
            for (const auto& s : refs.sites) {
                sites.push_back({{"path", s.referencing_file},
                                 {"line", s.line},
                                 {"snippet", s.snippet},
                                 {"test_or_demo", s.test_or_demo}});
            }
            json refs_out{{"usage", to_string(refs.usage)}, {"sites", sites}};
            if (refs.error_note) refs_out["error_note"] = *refs.error_note;
            pool.append_transcript("reference_checking", digest_of(c.location.file_path), refs_out);

            report.usage = refs.usage;
            report.decisive_site = refs.decisive_site;
            if (refs.error_note && !report.error_note) report.error_note = refs.error_note;
            switch (refs.usage) {
                case UsageClass::Production:
                    report.recommendation = Indication::Genuine;
                    if (refs.decisive_site) {
                        report.cited_evidence.push_back(
                            "production reference at " + refs.decisive_site->referencing_file + ":" +
                            std::to_string(refs.decisive_site->line) + ": " +
                            refs.decisive_site->snippet);
                    } else {
                        report.cited_evidence.push_back("referenced from production code");
                    }
                    break;
                case UsageClass::TestOrDemo:
                    report.recommendation = Indication::FalsePositiveIndicated;
                    report.cited_evidence.push_back("referenced only from test or demo paths");
                    break;
                case UsageClass::Unreferenced:
                    report.recommendation = Indication::Genuine;
                    report.low_confidence = true;
                    report.cited_evidence.push_back(
                        "standalone key file with no project references; flagged conservatively");
                    break;
            }
            break;
        }
    }

    pool.append_conclusion("advanced", iteration, to_json(report), {"context_checking"});
    return report;
}

}  // namespace secretsift
