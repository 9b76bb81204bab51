// Backends: deterministic purity, HTTP client behavior against a stub
// server, lenient reply parsing, and cost accounting.

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "secretsift/backend.hpp"
#include "secretsift/orchestrator.hpp"
#include "testutil.hpp"

using namespace secretsift;

namespace {

json chat_reply(const std::string& content, int prompt_tokens, int completion_tokens) {
    return json{{"choices", json::array({json{{"message", json{{"role", "assistant"},
                                                               {"content", content}}}}})},
                {"usage",
                 {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}};
}

/// Stub chat-completion server bound to an ephemeral localhost port.
class StubServer {
public:
    explicit StubServer(httplib::Server::Handler handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

HttpBackendConfig fast_config(const std::string& endpoint) {
    HttpBackendConfig c;
    c.endpoint = endpoint;
    c.timeout_ms = 1500;
    c.max_retries = 3;
    c.backoff_base_ms = 1;
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lenient reply parsing

TEST(ExtractFirstJsonObject, FirstValidObjectWins) {
    const auto j = extract_first_json_object("chatter {\"bad\": } then {\"good\": 1} and {\"more\": 2}");
    ASSERT_TRUE(j.has_value());
    EXPECT_EQ((*j)["good"].get<int>(), 1);

    EXPECT_FALSE(extract_first_json_object("no objects here").has_value());
    EXPECT_FALSE(extract_first_json_object("{unclosed").has_value());

    const auto fenced = extract_first_json_object("```json\n{\"a\": {\"nested\": \"}\"}}\n```");
    ASSERT_TRUE(fenced.has_value());
    EXPECT_EQ((*fenced)["a"]["nested"].get<std::string>(), "}");
}

// ---------------------------------------------------------------------------
// Deterministic backend

TEST(DeterministicBackendContract, PureAndZeroCost) {
    DeterministicBackend backend;
    const std::string prompt =
        "evidence:\n```json\n"
        "{\"stage\":\"context_judgment\",\"file_kind\":\"key_material\",\"indicators\":[]}\n```";
    const auto a = backend.complete(prompt);
    const auto b = backend.complete(prompt);
    EXPECT_TRUE(a.ok);
    EXPECT_EQ(a.text, b.text);  // purity
    const auto usage = backend.meter().snapshot();
    EXPECT_EQ(usage.total_requests, 2u);
    EXPECT_EQ(usage.prompt_tokens, 0u);
    EXPECT_EQ(usage.completion_tokens, 0u);
}

TEST(DeterministicBackendContract, MissingEvidenceBlockIsUnclear) {
    DeterministicBackend backend;
    const auto reply = backend.complete("a prompt with no json evidence");
    ASSERT_TRUE(reply.ok);
    const auto parsed = extract_first_json_object(reply.text);
    ASSERT_TRUE(parsed.has_value());
    EXPECT_FALSE(parsed->contains("suspicion"));
    EXPECT_TRUE(parsed->contains("error"));
}

TEST(DeterministicBackendContract, PlaceholderEvidenceIndicatesFalsePositive) {
    DeterministicBackend backend;
    const json evidence{
        {"stage", "basic_synthesis"},
        {"secret_type", "MongoDB"},
        {"format", {{"conforms", true}, {"strict_rule_name", "mongodb-strict"}}},
        {"placeholders", {{"found", true}, {"matched_tokens", json::array({"username"})}}},
        {"readability", {{"word_fraction", 0.2}, {"verdict_hint", "opaque"}}}};
    const auto reply = backend.complete("```json\n" + evidence.dump() + "\n```");
    const auto parsed = extract_first_json_object(reply.text);
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ((*parsed)["suspicion"].get<std::string>(), "false_positive_indicated");
}

// ---------------------------------------------------------------------------
// HTTP backend vs stub server

TEST(HttpBackendContract, DeliversReplyAndRecordsUsage) {
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        EXPECT_EQ(body.at("model").get<std::string>(), "stub-model");
        EXPECT_EQ(body.at("messages").at(0).at("role").get<std::string>(), "user");
        res.set_content(chat_reply("hello from stub", 120, 7).dump(), "application/json");
    });
    auto config = fast_config(server.endpoint());
    config.model = "stub-model";
    HttpBackend backend(config);
    const auto reply = backend.complete("ping");
    ASSERT_TRUE(reply.ok) << reply.error;
    EXPECT_EQ(reply.text, "hello from stub");
    EXPECT_EQ(reply.usage.prompt_tokens, 120u);
    EXPECT_EQ(reply.usage.completion_tokens, 7u);
    const auto usage = backend.meter().snapshot();
    EXPECT_EQ(usage.total_requests, 1u);
    EXPECT_EQ(usage.prompt_tokens, 120u);
}

TEST(HttpBackendContract, RetriesOn429ThenSucceeds) {
    std::atomic<int> hits{0};
    StubServer server([&hits](const httplib::Request&, httplib::Response& res) {
        if (hits.fetch_add(1) < 2) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
            return;
        }
        res.set_content(chat_reply("finally", 10, 2).dump(), "application/json");
    });
    HttpBackend backend(fast_config(server.endpoint()));
    const auto reply = backend.complete("ping");
    ASSERT_TRUE(reply.ok) << reply.error;
    EXPECT_EQ(reply.text, "finally");
    EXPECT_EQ(hits.load(), 3);
    EXPECT_EQ(backend.meter().snapshot().total_requests, 3u);  // 2 rejected + 1 success
}

TEST(HttpBackendContract, RetryCapExhausts) {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("down", "text/plain");
    });
    auto config = fast_config(server.endpoint());
    config.max_retries = 2;
    HttpBackend backend(config);
    const auto reply = backend.complete("ping");
    EXPECT_FALSE(reply.ok);
    EXPECT_NE(reply.error.find("503"), std::string::npos);
    EXPECT_EQ(backend.meter().snapshot().total_requests, 3u);  // initial + 2 retries
}

TEST(HttpBackendContract, HangPastTimeoutIsAnErrorWithZeroCompletionTokens) {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1200));
        res.set_content(chat_reply("too late", 5, 5).dump(), "application/json");
    });
    auto config = fast_config(server.endpoint());
    config.timeout_ms = 200;
    HttpBackend backend(config);
    const auto started = std::chrono::steady_clock::now();
    const auto reply = backend.complete("ping");
    const auto elapsed = std::chrono::steady_clock::now() - started;
    EXPECT_FALSE(reply.ok);
    EXPECT_EQ(reply.usage.completion_tokens, 0u);
    EXPECT_LT(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count(), 1100);
}

TEST(HttpBackendContract, NonJsonBodyIsAnError) {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content("<html>definitely not json</html>", "text/html");
    });
    HttpBackend backend(fast_config(server.endpoint()));
    const auto reply = backend.complete("ping");
    EXPECT_FALSE(reply.ok);
    EXPECT_NE(reply.error.find("non-JSON"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Backend interchangeability: the pipeline completes with either backend

TEST(BackendInterchangeability, PipelineCompletesWithHttpBackend) {
    // The stub mimics a reasonable model: dispatch basic first, then final.
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        const json body = json::parse(req.body);
        const std::string prompt = body.at("messages").at(0).at("content").get<std::string>();
        std::string content;
        if (prompt.find("\"basic\":null") != std::string::npos ||
            prompt.find("\"basic\": null") != std::string::npos) {
            content = R"({"action":"dispatch","agent":"basic"})";
        } else if (prompt.find("\"stage\":\"basic_synthesis\"") != std::string::npos) {
            content = R"({"suspicion":"genuine","cited_evidence":["stub says genuine"]})";
        } else {
            content =
                R"({"action":"final","classification":"true_leak","confidence":"high","reasons":["stub final"]})";
        }
        res.set_content(chat_reply(content, 40, 12).dump(), "application/json");
    });
    HttpBackend backend(fast_config(server.endpoint()));
    RuleSet strict(default_strict_rules());
    VerifyToolsets toolsets;
    toolsets.basic.strict_rules = &strict;
    ReferenceGraph graph;
    auto c = testutil::make_candidate(SecretType::Aws, "AKIAQ7R2XKV9ZW4PMJT6");
    const Verdict v = verify_candidate(c, graph, backend, {}, toolsets);
    EXPECT_EQ(v.classification, Classification::TrueLeak);
    EXPECT_FALSE(v.reasons.empty());
    const MemoryPool pool = MemoryPool::from_json(v.pool_snapshot);
    EXPECT_GT(pool.size(), 0u);
    EXPECT_GT(backend.meter().snapshot().prompt_tokens, 0u);
}

TEST(BackendInterchangeability, GarbageHttpRepliesStillTerminate) {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(chat_reply("I am not structured at all", 9, 9).dump(), "application/json");
    });
    HttpBackend backend(fast_config(server.endpoint()));
    RuleSet strict(default_strict_rules());
    VerifyToolsets toolsets;
    toolsets.basic.strict_rules = &strict;
    ReferenceGraph graph;
    auto c = testutil::make_candidate(SecretType::Aws, "AKIAQ7R2XKV9ZW4PMJT6");
    const Verdict v = verify_candidate(c, graph, backend, {}, toolsets);
    // Fail-safe path: dispatch basic at iteration 0, then undetermined.
    EXPECT_EQ(v.classification, Classification::Undetermined);
    EXPECT_FALSE(v.reasons.empty());
}

// ---------------------------------------------------------------------------
// Cost accounting

TEST(CostMeterContract, MonotoneUnderConcurrency) {
    CostMeter meter;
    std::vector<std::thread> workers;
    for (int t = 0; t < 8; ++t) {
        workers.emplace_back([&meter] {
            for (int i = 0; i < 1000; ++i) meter.add_request(3, 2, 10);
        });
    }
    for (auto& w : workers) w.join();
    const auto usage = meter.snapshot();
    EXPECT_EQ(usage.total_requests, 8000u);
    EXPECT_EQ(usage.prompt_tokens, 24000u);
    EXPECT_EQ(usage.completion_tokens, 16000u);
}

TEST(EstimateCost, ZeroRequestsCostNothing) {
    const auto report = estimate_cost(CostUsage{}, PriceTable{});
    EXPECT_DOUBLE_EQ(report.estimated_dollars, 0.0);
}

TEST(EstimateCost, PerTokenArithmetic) {
    CostUsage usage;
    usage.total_requests = 1;
    usage.prompt_tokens = 1000;
    usage.completion_tokens = 1000;
    const auto report = estimate_cost(usage, PriceTable{0.0025, 0.01});
    EXPECT_NEAR(report.estimated_dollars, 0.0125, 1e-12);
}

TEST(EstimateCost, ReplayAtPaperScale) {
    // 97 repeated sessions of 6000 prompt + 778 completion tokens at the
    // default prices land on the recorded totals within a cent.
    CostMeter meter;
    for (int repo = 0; repo < 97; ++repo) meter.add_request(6000, 778, 42 * 1000000ull);
    const auto report = estimate_cost(meter.snapshot(), PriceTable{0.0025, 0.01});
    EXPECT_NEAR(report.estimated_dollars, 2.21, 0.01);
    EXPECT_NEAR(report.estimated_dollars / 97.0, 0.023, 0.01);
    EXPECT_NEAR(report.wall_seconds, 97.0 * 42.0, 1e-6);
}
