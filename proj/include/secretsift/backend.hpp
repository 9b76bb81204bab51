#pragma once
// Pluggable semantic-analysis backend: an HTTP chat-completion client and a
// deterministic rule-table implementation satisfying the same contract.
// Backends never touch the repository or the memory pool; they turn a
// rendered prompt into a structured reply and meter their own cost.

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>

#include "secretsift/core.hpp"

namespace secretsift {

// ---------------------------------------------------------------------------
// Reply and cost plumbing

struct TokenUsage {
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
};

struct BackendReply {
    bool ok = false;
    std::string text;
    std::string error;
    TokenUsage usage;
};

struct CostUsage {
    std::uint64_t total_requests = 0;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    double wall_seconds = 0.0;
};

/// Monotone counters, safe for concurrent sessions sharing one backend.
class CostMeter {
public:
    void add_request(std::uint64_t prompt_tokens, std::uint64_t completion_tokens,
                     std::uint64_t wall_micros) {
        requests_.fetch_add(1, std::memory_order_relaxed);
        prompt_tokens_.fetch_add(prompt_tokens, std::memory_order_relaxed);
        completion_tokens_.fetch_add(completion_tokens, std::memory_order_relaxed);
        wall_micros_.fetch_add(wall_micros, std::memory_order_relaxed);
    }

    CostUsage snapshot() const {
        CostUsage u;
        u.total_requests = requests_.load(std::memory_order_relaxed);
        u.prompt_tokens = prompt_tokens_.load(std::memory_order_relaxed);
        u.completion_tokens = completion_tokens_.load(std::memory_order_relaxed);
        u.wall_seconds = static_cast<double>(wall_micros_.load(std::memory_order_relaxed)) / 1e6;
        return u;
    }

private:
    std::atomic<std::uint64_t> requests_{0};
    std::atomic<std::uint64_t> prompt_tokens_{0};
    std::atomic<std::uint64_t> completion_tokens_{0};
    std::atomic<std::uint64_t> wall_micros_{0};
};

struct PriceTable {
    double input_per_1k = 0.0025;  // gpt-4o 2024-08-06 list prices
    double output_per_1k = 0.01;
};

struct CostReport {
    std::uint64_t total_requests = 0;
    std::uint64_t prompt_tokens = 0;
    std::uint64_t completion_tokens = 0;
    double estimated_dollars = 0.0;
    double wall_seconds = 0.0;
};

inline CostReport estimate_cost(const CostUsage& usage, const PriceTable& prices) {
    CostReport r;
    r.total_requests = usage.total_requests;
    r.prompt_tokens = usage.prompt_tokens;
    r.completion_tokens = usage.completion_tokens;
    r.estimated_dollars = static_cast<double>(usage.prompt_tokens) / 1000.0 * prices.input_per_1k +
                          static_cast<double>(usage.completion_tokens) / 1000.0 * prices.output_per_1k;
    r.wall_seconds = usage.wall_seconds;
    return r;
}

// ---------------------------------------------------------------------------
// Lenient structured-reply parsing: first valid JSON object wins.

inline std::optional<json> extract_first_json_object(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t j = i; j < text.size(); ++j) {
            const char c = text[j];
            if (in_string) {
                if (escaped) escaped = false;
                else if (c == '\\') escaped = true;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0) {
                    json parsed = json::parse(text.substr(i, j - i + 1), nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Contract

class AnalysisBackend {
public:
    virtual ~AnalysisBackend() = default;
    virtual BackendReply complete(const std::string& prompt) = 0;
    virtual std::string name() const = 0;
    const CostMeter& meter() const { return meter_; }

protected:
    CostMeter meter_;
};

// ---------------------------------------------------------------------------
// Deterministic backend: the offline reference policy. A pure function of
// the evidence block embedded in the prompt; zero token cost.

class DeterministicBackend final : public AnalysisBackend {
public:
    BackendReply complete(const std::string& prompt) override {
        meter_.add_request(0, 0, 0);
        BackendReply reply;
        reply.ok = true;
        const auto evidence = extract_first_json_object(prompt);
        if (!evidence || !evidence->contains("stage")) {
            reply.text = fence(json{{"error", "evidence block missing"}});
            return reply;
        }
        const std::string stage = (*evidence)["stage"].is_string()
                                      ? (*evidence)["stage"].get<std::string>()
                                      : std::string();
        if (stage == "basic_synthesis") reply.text = fence(basic_synthesis(*evidence));
        else if (stage == "context_judgment") reply.text = fence(context_judgment(*evidence));
        else if (stage == "reference_usage") reply.text = fence(reference_usage(*evidence));
        else if (stage == "commander") reply.text = fence(commander(*evidence));
        else reply.text = fence(json{{"error", "unknown stage"}});
        return reply;
    }

    std::string name() const override { return "deterministic"; }

private:
    static std::string fence(const json& j) { return "```json\n" + j.dump() + "\n```"; }

    static std::string format_fraction(double f) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", f);
        return buf;
    }

    static json basic_synthesis(const json& e) {
        const auto& format = e.at("format");
        const auto& placeholders = e.at("placeholders");
        const auto& readability = e.at("readability");
        json cited = json::array();
        if (!format.at("conforms").get<bool>()) {
            cited.push_back("format check failed: " +
                            format.value("failure_reason", std::string("nonconforming")));
            return json{{"suspicion", "false_positive_indicated"}, {"cited_evidence", cited}};
        }
        if (placeholders.at("found").get<bool>()) {
            std::string tokens;
            for (const auto& t : placeholders.at("matched_tokens")) {
                if (!tokens.empty()) tokens += ", ";
                tokens += t.get<std::string>();
            }
            cited.push_back("placeholder tokens found: " + tokens);
            return json{{"suspicion", "false_positive_indicated"}, {"cited_evidence", cited}};
        }
        const double fraction = readability.at("word_fraction").get<double>();
        if (readability.at("verdict_hint").get<std::string>() == "readable") {
            cited.push_back("value reads as natural words (word fraction " +
                            format_fraction(fraction) + ")");
            return json{{"suspicion", "false_positive_indicated"}, {"cited_evidence", cited}};
        }
        cited.push_back("key format conforms (" +
                        format.value("strict_rule_name", std::string("strict rule")) + ")");
        cited.push_back("no placeholder tokens");
        cited.push_back("value is opaque (word fraction " + format_fraction(fraction) + ")");
        return json{{"suspicion", "genuine"}, {"cited_evidence", cited}};
    }

    static json context_judgment(const json& e) {
        std::size_t doc_like = 0, production = 0;
        for (const auto& ind : e.at("indicators")) {
            const std::string kind = ind.at("kind").get<std::string>();
            if (kind == "production_hint") ++production;
            else ++doc_like;
        }
        if (doc_like == 0 && production == 0) {
            const std::string kind = e.at("file_kind").get<std::string>();
            if (kind == "key_material" || kind == "data") return json{{"judgment", "insufficient"}};
            return json{{"judgment", "operational"}};
        }
        if (doc_like >= production) return json{{"judgment", "illustrative"}};
        return json{{"judgment", "operational"}};
    }

    static json reference_usage(const json& e) {
        const auto& sites = e.at("sites");
        if (sites.empty()) return json{{"usage", "unreferenced"}};
        // Prefer a production site whose snippet names credential loading.
        static const char* kLoadingHints[] = {"private_key", "key_string", "secret",
                                              "credential", "password", "token", "key"};
        const json* decisive = nullptr;
        for (const auto& s : sites) {
            if (s.at("test_or_demo").get<bool>()) continue;
            if (!decisive) decisive = &s;
            const std::string snippet = lowercase_copy(s.at("snippet").get<std::string>());
            for (const char* hint : kLoadingHints) {
                if (snippet.find(hint) != std::string::npos) {
                    decisive = &s;
                    return json{{"usage", "production"}, {"decisive_site", *decisive}};
                }
            }
        }
        if (decisive) return json{{"usage", "production"}, {"decisive_site", *decisive}};
        return json{{"usage", "test_or_demo"}};
    }

    static json commander(const json& e) {
        const json& basic = e.at("basic");
        const json& advanced = e.at("advanced");
        if (basic.is_null()) return json{{"action", "dispatch"}, {"agent", "basic"}};

        if (advanced.is_null()) {
            const std::string suspicion = basic.value("suspicion", std::string("unclear"));
            if (suspicion == "false_positive_indicated") {
                return final_reply("false_positive", "high", basic, "level 1 analysis indicates a false positive");
            }
            if (suspicion == "genuine") {
                const std::string kind = e.at("file_kind").get<std::string>();
                const double entropy = e.at("entropy_bits").get<double>();
                if (kind == "document" || kind == "key_material" || kind == "config" ||
                    entropy < 3.5) {
                    return json{{"action", "dispatch"}, {"agent", "advanced"}};
                }
                json r = final_reply("true_leak", "high", basic, "intrinsic checks found no false-positive signals");
                r["reasons"].push_back("high-entropy value in a code-kind file");
                return r;
            }
            return json{{"action", "dispatch"}, {"agent", "advanced"}};
        }

        const std::string rec = advanced.value("recommendation", std::string("unclear"));
        if (rec == "genuine") {
            const bool low = advanced.value("low_confidence", false);
            return final_reply("true_leak", low ? "low" : "high", advanced,
                               "advanced analysis indicates a genuine leak");
        }
        if (rec == "false_positive_indicated") {
            return final_reply("false_positive", "high", advanced,
                               "advanced analysis indicates a false positive");
        }
        return json{{"action", "dispatch"}, {"agent", "advanced"}};
    }

    static json final_reply(const char* classification, const char* confidence, const json& record,
                            const char* fallback_reason) {
        json reasons = json::array();
        if (record.contains("cited_evidence") && record["cited_evidence"].is_array()) {
            for (const auto& r : record["cited_evidence"]) reasons.push_back(r);
        }
        if (reasons.empty()) reasons.push_back(fallback_reason);
        return json{{"action", "final"},
                    {"classification", classification},
                    {"confidence", confidence},
                    {"reasons", reasons}};
    }

    static std::string lowercase_copy(std::string s) {
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }
};

// ---------------------------------------------------------------------------
// HTTP chat-completion backend

struct HttpBackendConfig {
    std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/chat/completions
    std::string model = "gpt-4o";
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_base_ms = 250;
    std::string api_key_env = "OPENAI_API_KEY";
};

/// Debug sink with redaction applied before anything is written.
struct DebugLog {
    std::ostream* sink = nullptr;
    std::function<std::string(std::string)> redact;  // identity when unset
    std::mutex mu;

    void write(std::string line) {
        if (!sink) return;
        if (redact) line = redact(std::move(line));
        std::lock_guard<std::mutex> lock(mu);
        (*sink) << "[debug] " << line << "\n";
    }
};

class HttpBackend final : public AnalysisBackend {
public:
    explicit HttpBackend(HttpBackendConfig config, DebugLog* debug = nullptr)
        : config_(std::move(config)), debug_(debug) {
        const auto scheme_end = config_.endpoint.find("://");
        std::size_t path_start = std::string::npos;
        if (scheme_end != std::string::npos) {
            path_start = config_.endpoint.find('/', scheme_end + 3);
        }
        if (path_start == std::string::npos) {
            base_ = config_.endpoint;
            path_ = "/v1/chat/completions";
        } else {
            base_ = config_.endpoint.substr(0, path_start);
            path_ = config_.endpoint.substr(path_start);
        }
    }

    BackendReply complete(const std::string& prompt) override {
        httplib::Client client(base_);
        const auto timeout_s = config_.timeout_ms / 1000;
        const auto timeout_us = (config_.timeout_ms % 1000) * 1000;
        client.set_connection_timeout(timeout_s, timeout_us);
        client.set_read_timeout(timeout_s, timeout_us);
        client.set_write_timeout(timeout_s, timeout_us);

        httplib::Headers headers;
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        const json body{{"model", config_.model},
                        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})}};
        const std::string payload = body.dump();
        if (debug_) debug_->write("request " + base_ + path_ + " body=" + payload);

        BackendReply reply;
        int delay_ms = config_.backoff_base_ms;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
                delay_ms *= 2;
            }
            const auto started = std::chrono::steady_clock::now();
            httplib::Result res = client.Post(path_, headers, payload, "application/json");
            const auto wall = std::chrono::duration_cast<std::chrono::microseconds>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
            if (!res) {
                meter_.add_request(0, 0, static_cast<std::uint64_t>(wall));
                reply.error = "request failed: " + httplib::to_string(res.error());
                if (debug_) debug_->write("error " + reply.error);
                return reply;  // timeouts and transport errors are not retried
            }
            if (res->status == 429 || res->status >= 500) {
                meter_.add_request(0, 0, static_cast<std::uint64_t>(wall));
                reply.error = "status " + std::to_string(res->status);
                if (debug_) debug_->write("retryable " + reply.error);
                continue;
            }
            if (res->status != 200) {
                meter_.add_request(0, 0, static_cast<std::uint64_t>(wall));
                reply.error = "status " + std::to_string(res->status);
                if (debug_) debug_->write("error " + reply.error);
                return reply;
            }
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) {
                meter_.add_request(0, 0, static_cast<std::uint64_t>(wall));
                reply.error = "non-JSON response body";
                if (debug_) debug_->write("error " + reply.error);
                return reply;
            }
            try {
                reply.text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const json::exception&) {
                meter_.add_request(0, 0, static_cast<std::uint64_t>(wall));
                reply.error = "response missing choices[0].message.content";
                if (debug_) debug_->write("error " + reply.error);
                return reply;
            }
            if (parsed.contains("usage")) {
                reply.usage.prompt_tokens = parsed["usage"].value("prompt_tokens", 0ull);
                reply.usage.completion_tokens = parsed["usage"].value("completion_tokens", 0ull);
            }
            meter_.add_request(reply.usage.prompt_tokens, reply.usage.completion_tokens,
                               static_cast<std::uint64_t>(wall));
            reply.ok = true;
            if (debug_) debug_->write("reply " + reply.text);
            return reply;
        }
        reply.error = "retries exhausted: " + reply.error;
        if (debug_) debug_->write("error " + reply.error);
        return reply;
    }

    std::string name() const override { return "http:" + config_.model; }

private:
    HttpBackendConfig config_;
    DebugLog* debug_ = nullptr;
    std::string base_;
    std::string path_;
};

}  // namespace secretsift
