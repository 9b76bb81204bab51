#pragma once
// Initial screening stage: walks a working tree and emits candidate secrets
// via broad per-type patterns plus optional entropy gates. Broad by design —
// the verification pipeline narrows.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "secretsift/core.hpp"
#include "secretsift/fsutil.hpp"
#include "secretsift/rules.hpp"

namespace secretsift {

// ---------------------------------------------------------------------------
// Entropy

/// Shannon entropy over the character frequency distribution, in bits per
/// character: H = -sum p_i * log2(p_i). Empty input yields 0.
inline double shannon_entropy(std::string_view s) {
    if (s.empty()) return 0.0;
    std::size_t counts[256] = {};
    for (unsigned char c : s) ++counts[c];
    const double n = static_cast<double>(s.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;  // clamp -0.0 from single-symbol inputs
}

/// The portion of a matched value the entropy gate applies to: fixed prefixes
/// carry no information, so they are stripped for prefix-token types.
inline std::string_view token_body(SecretType t, std::string_view raw) {
    switch (t) {
        case SecretType::Aws:
            return raw.substr(std::min<std::size_t>(4, raw.size()));  // AKIA
        case SecretType::GitHub:
            return raw.substr(std::min<std::size_t>(4, raw.size()));  // gh?_
        case SecretType::Huggingface:
        case SecretType::OpenAi:
            return raw.substr(std::min<std::size_t>(3, raw.size()));  // hf_ / sk-
        default:
            return raw;
    }
}

// ---------------------------------------------------------------------------
// Scan configuration (screener subset)

struct ScanOptions {
    int window_lines = 3;
    std::size_t max_file_bytes = kDefaultMaxFileBytes;
    std::size_t max_context_bytes = 4096;
    std::map<SecretType, double> min_entropy_override;
    std::set<std::string> disabled_rules;
    unsigned jobs = 0;
};

// ---------------------------------------------------------------------------
// Context extraction

/// Context window: the `window_lines` full lines before the match and after
/// it, clipped at file bounds and at max_bytes without splitting a UTF-8
/// code point. Invalid sequences are replaced, not preserved.
inline ContextWindow extract_context(std::string_view content, const SourceLocation& loc,
                                     int window_lines, std::size_t max_bytes) {
    const auto starts = line_starts(content);
    ContextWindow w;
    w.file_kind = classify_file_kind(loc.file_path);

    const std::size_t match_line = line_of_offset(starts, loc.byte_span.start);
    const std::size_t first_line =
        match_line > static_cast<std::size_t>(window_lines) ? match_line - window_lines : 1;
    const std::size_t before_begin = starts[first_line - 1];
    if (loc.byte_span.start > before_begin) {
        w.before = utf8_sanitize_tail(content.substr(before_begin, loc.byte_span.start - before_begin),
                                      max_bytes);
    }

    const std::size_t end_off = loc.byte_span.end == 0 ? 0 : loc.byte_span.end - 1;
    const std::size_t end_line = line_of_offset(starts, std::min(end_off, content.size()));
    const std::size_t last_line = end_line + static_cast<std::size_t>(window_lines);
    const std::size_t after_end = line_end_offset(content, starts, last_line);
    if (after_end > loc.byte_span.end) {
        w.after = utf8_sanitize(content.substr(loc.byte_span.end, after_end - loc.byte_span.end),
                                max_bytes);
    }
    return w;
}

// ---------------------------------------------------------------------------
// Scanning

namespace detail {

/// Cheap literal prefilters per default rule; a rule with no entry falls back
/// to running its regex on every line.
inline const std::vector<std::string>& anchors_for_rule(const std::string& name) {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"aws-access-key", {"AKIA"}},
        {"github-token", {"ghp_", "gho_", "ghu_", "ghs_", "ghr_"}},
        {"huggingface-token", {"hf_"}},
        {"jdbc-url", {"jdbc:"}},
        {"mongodb-url", {"mongodb"}},
        {"openai-key", {"sk-"}},
        {"postgresql-url", {"postgres"}},
        {"redis-url", {"redis://"}},
        {"credentialed-uri", {"://"}},
    };
    static const std::vector<std::string> none;
    auto it = table.find(name);
    return it == table.end() ? none : it->second;
}

inline bool line_has_anchor(std::string_view line, const std::vector<std::string>& anchors) {
    if (anchors.empty()) return true;
    for (const auto& a : anchors) {
        if (line.find(a) != std::string_view::npos) return true;
    }
    return false;
}

inline bool is_base64_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) return false;
    for (char c : line) {
        const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                        c == '+' || c == '/' || c == '=';
        if (!ok) return false;
    }
    return true;
}

inline std::string_view trim_eol(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    return line;
}

/// Scans a whole file for PEM private-key blocks: BEGIN marker, one or more
/// base64 body lines, END marker. Returns [start, end) spans.
inline std::vector<ByteSpan> find_private_key_blocks(std::string_view content) {
    static const std::regex begin_re(R"(-----BEGIN (?:[A-Z]+ )*PRIVATE KEY-----)");
    static const std::regex end_re(R"(-----END (?:[A-Z]+ )*PRIVATE KEY-----)");
    std::vector<ByteSpan> spans;
    const auto starts = line_starts(content);
    auto line_at = [&](std::size_t li) {
        const std::size_t ls = starts[li];
        const std::size_t le = li + 1 < starts.size() ? starts[li + 1] : content.size();
        return trim_eol(content.substr(ls, le - ls));
    };
    std::size_t li = 0;
    while (li < starts.size()) {
        std::string_view line = line_at(li);
        if (!line.starts_with("-----BEGIN ") || !std::regex_match(line.begin(), line.end(), begin_re)) {
            ++li;
            continue;
        }
        std::size_t body_lines = 0;
        std::size_t lj = li + 1;
        std::size_t block_end = 0;
        for (; lj < starts.size(); ++lj) {
            std::string_view cur = line_at(lj);
            if (is_base64_line(cur)) {
                ++body_lines;
                continue;
            }
            if (body_lines >= 1 && std::regex_match(cur.begin(), cur.end(), end_re)) {
                block_end = starts[lj] + cur.size();
            }
            break;
        }
        if (block_end > 0) {
            spans.push_back({starts[li], block_end});
            li = lj + 1;
        } else {
            ++li;
        }
    }
    return spans;
}

}  // namespace detail

/// Scans one file's content. Candidates whose span is strictly contained in
/// another candidate's span are suppressed, as is a URI candidate tied on
/// span with a scheme-specific one — the most specific rule wins.
inline std::vector<CandidateSecret> scan_file_content(std::string_view content,
                                                      const std::string& rel_path,
                                                      const RuleSet& rules,
                                                      const ScanOptions& options) {
    if (looks_binary(content)) return {};
    std::vector<CandidateSecret> found;
    const auto starts = line_starts(content);

    auto entropy_gate = [&](const DetectorRule& rule, std::string_view raw) {
        double threshold = rule.min_entropy_bits.value_or(0.0);
        auto it = options.min_entropy_override.find(rule.secret_type);
        if (it != options.min_entropy_override.end()) threshold = it->second;
        if (threshold <= 0.0) return true;
        return shannon_entropy(token_body(rule.secret_type, raw)) >= threshold;
    };

    auto emit = [&](const DetectorRule& rule, ByteSpan span) {
        std::string_view raw = content.substr(span.start, span.end - span.start);
        if (!entropy_gate(rule, raw)) return;
        CandidateSecret c;
        c.secret_type = rule.secret_type;
        c.raw_value = std::string(raw);
        c.location = {rel_path, line_of_offset(starts, span.start), span};
        c.context = extract_context(content, c.location, options.window_lines, options.max_context_bytes);
        c.entropy_bits = shannon_entropy(raw);
        c.detector_rule = rule.name;
        c.id = compute_candidate_id(rel_path, span, rule.secret_type);
        found.push_back(std::move(c));
    };

    const auto& all = rules.rules();
    for (std::size_t ri = 0; ri < all.size(); ++ri) {
        const DetectorRule& rule = all[ri];
        if (options.disabled_rules.count(rule.name)) continue;
        if (rule.secret_type == SecretType::PrivateKey) {
            for (ByteSpan span : detail::find_private_key_blocks(content)) emit(rule, span);
            continue;
        }
        const auto& anchors = detail::anchors_for_rule(rule.name);
        for (std::size_t li = 0; li < starts.size(); ++li) {
            const std::size_t ls = starts[li];
            const std::size_t le = li + 1 < starts.size() ? starts[li + 1] : content.size();
            std::string_view line = content.substr(ls, le - ls);
            if (!detail::line_has_anchor(line, anchors)) continue;
            for (std::cregex_iterator it(line.data(), line.data() + line.size(), rules.compiled(ri)), end;
                 it != end; ++it) {
                const auto& m = *it;
                emit(rule, {ls + static_cast<std::size_t>(m.position(0)),
                            ls + static_cast<std::size_t>(m.position(0)) + static_cast<std::size_t>(m.length(0))});
            }
        }
    }

    // Suppression pass.
    std::vector<CandidateSecret> kept;
    for (const auto& c : found) {
        bool suppressed = false;
        for (const auto& other : found) {
            if (&other == &c) continue;
            const bool contains = other.location.byte_span.start <= c.location.byte_span.start &&
                                  other.location.byte_span.end >= c.location.byte_span.end;
            const bool strictly = contains && other.location.byte_span != c.location.byte_span;
            if (strictly) {
                suppressed = true;
                break;
            }
            if (contains && c.secret_type == SecretType::Uri && other.secret_type != SecretType::Uri) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(c);
    }

    std::sort(kept.begin(), kept.end(), [](const CandidateSecret& a, const CandidateSecret& b) {
        return std::tie(a.location.file_path, a.location.byte_span.start, a.location.byte_span.end,
                        a.secret_type) < std::tie(b.location.file_path, b.location.byte_span.start,
                                                  b.location.byte_span.end, b.secret_type);
    });
    return kept;
}

/// Walks the tree and scans every eligible file. Deterministic: output order
/// and content are independent of traversal order and worker count.
inline std::vector<CandidateSecret> scan_repository(const fs::path& root, const RuleSet& rules,
                                                    const ScanOptions& options,
                                                    std::vector<std::string>* warnings = nullptr) {
    std::vector<std::string> local_warnings;
    const auto files = walk_tree(root, options.max_file_bytes, &local_warnings);

    std::vector<std::vector<CandidateSecret>> per_file(files.size());
    std::vector<std::string> file_warnings(files.size());
    parallel_for(files.size(), options.jobs, [&](std::size_t i) {
        const auto content = read_file(root / files[i], options.max_file_bytes + 1);
        if (!content) {
            file_warnings[i] = "unreadable, skipped: " + files[i];
            return;
        }
        if (content->size() > options.max_file_bytes) return;  // raced past the size cap
        per_file[i] = scan_file_content(*content, files[i], rules, options);
    });

    std::vector<CandidateSecret> out;
    for (auto& v : per_file) {
        out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    }
    if (warnings) {
        *warnings = std::move(local_warnings);
        for (auto& w : file_warnings) {
            if (!w.empty()) warnings->push_back(std::move(w));
        }
    }
    return out;  // already sorted: files sorted, per-file sorted
}

// ---------------------------------------------------------------------------
// External-finding ingestion

struct IngestResult {
    std::vector<CandidateSecret> candidates;
    std::vector<std::string> warnings;
    std::size_t skipped = 0;
    std::set<std::string> missing_file_ids;  // candidates whose source file was absent
};

inline std::map<std::string, SecretType> default_alias_table() {
    std::map<std::string, SecretType> t;
    for (SecretType s : kAllSecretTypes) t[to_string(s)] = s;
    return t;
}

/// Reads line-delimited JSON findings {file, line, raw, detector_name} and
/// maps them onto candidates. Spans are recomputed from the stated line and
/// the first occurrence of the raw value on it.
inline IngestResult ingest_external_findings(const fs::path& findings_path, const fs::path& root,
                                             const std::map<std::string, SecretType>& aliases,
                                             const ScanOptions& options) {
    IngestResult result;
    const auto text = read_file(findings_path, static_cast<std::size_t>(64) * 1024 * 1024);
    if (!text) throw std::runtime_error("cannot read findings file: " + findings_path.string());

    std::size_t lineno = 0, malformed = 0, total = 0;
    std::istringstream in(*text);
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++total;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("file") || !rec.contains("line") ||
            !rec.contains("raw") || !rec.contains("detector_name")) {
            result.warnings.push_back("line " + std::to_string(lineno) + ": malformed record, skipped");
            ++malformed;
            ++result.skipped;
            continue;
        }
        const std::string file = rec["file"].get<std::string>();
        const std::size_t rec_line = rec["line"].get<std::size_t>();
        const std::string raw = rec["raw"].get<std::string>();
        const std::string detector = rec["detector_name"].get<std::string>();

        auto alias = aliases.find(detector);
        if (alias == aliases.end()) {
            result.warnings.push_back("line " + std::to_string(lineno) + ": unknown detector '" +
                                      detector + "', skipped");
            ++result.skipped;
            continue;
        }
        const SecretType type = alias->second;

        CandidateSecret c;
        c.secret_type = type;
        c.detector_rule = "ingest:" + detector;

        const auto content = read_file(root / file, options.max_file_bytes);
        if (!content) {
            result.warnings.push_back("line " + std::to_string(lineno) + ": source file missing: " + file);
            c.raw_value = raw;
            c.location = {file, rec_line, {0, 0}};
            c.context.file_kind = classify_file_kind(file);
            c.entropy_bits = shannon_entropy(raw);
            c.id = compute_candidate_id(file, c.location.byte_span, type);
            result.missing_file_ids.insert(c.id);
            result.candidates.push_back(std::move(c));
            continue;
        }

        const auto starts = line_starts(*content);
        if (rec_line == 0 || rec_line > starts.size()) {
            result.warnings.push_back("line " + std::to_string(lineno) + ": line " +
                                      std::to_string(rec_line) + " out of range in " + file);
            ++result.skipped;
            continue;
        }
        const std::size_t ls = starts[rec_line - 1];
        const std::size_t le = line_end_offset(*content, starts, rec_line);
        ByteSpan span;
        std::string value = raw;
        const auto on_line = content->find(raw, ls);
        if (!raw.empty() && on_line != std::string::npos && on_line + raw.size() <= le) {
            span = {on_line, on_line + raw.size()};
        } else {
            const auto anywhere = content->find(raw);
            if (!raw.empty() && anywhere != std::string::npos) {
                span = {anywhere, anywhere + raw.size()};
                result.warnings.push_back("line " + std::to_string(lineno) +
                                          ": raw value relocated to line " +
                                          std::to_string(line_of_offset(starts, anywhere)) + " in " + file);
            } else {
                span = {ls, le};
                value = content->substr(ls, le - ls);
                result.warnings.push_back("line " + std::to_string(lineno) +
                                          ": raw value not found in " + file + ", spanning the stated line");
            }
        }
        c.raw_value = std::move(value);
        c.location = {file, line_of_offset(starts, span.start), span};
        c.context = extract_context(*content, c.location, options.window_lines, options.max_context_bytes);
        c.entropy_bits = shannon_entropy(c.raw_value);
        c.id = compute_candidate_id(file, span, type);
        result.candidates.push_back(std::move(c));
    }
    if (total > 0 && malformed == total) {
        throw std::runtime_error("findings file contains no parseable records: " + findings_path.string());
    }
    std::sort(result.candidates.begin(), result.candidates.end(),
              [](const CandidateSecret& a, const CandidateSecret& b) {
                  return std::tie(a.location.file_path, a.location.byte_span.start, a.secret_type) <
                         std::tie(b.location.file_path, b.location.byte_span.start, b.secret_type);
              });
    return result;
}

}  // namespace secretsift
