// Level-2 context analysis and Level-3 reference analysis.

#include <gtest/gtest.h>

#include <random>

#include "secretsift/advanced_check.hpp"
#include "secretsift/backend.hpp"
#include "testutil.hpp"

using namespace secretsift;
using testutil::TempDir;
using testutil::write_file;

namespace {

}  // namespace

// ---------------------------------------------------------------------------
// analyze_context

TEST(AnalyzeContext, ExplanatoryDocProseIsIllustrative) {
    auto c = testutil::make_candidate(
        SecretType::Aws, "AKIAQ7R2XKV9ZW4PMJT6", "docs/usage.md",
        "For example, set SECRET_ACCESS_KEY to a value like\n", "\nbefore running the importer.");
    DeterministicBackend backend;
    const auto a = analyze_context(c, backend, default_prompt_templates());
    EXPECT_EQ(a.judgment, ContextJudgment::Illustrative);
    bool saw_doc_indicator = false;
    for (const auto& ind : a.indicators) {
        if (ind.kind == IndicatorKind::DocExample) saw_doc_indicator = true;
    }
    EXPECT_TRUE(saw_doc_indicator);
}

TEST(AnalyzeContext, StandaloneKeyMaterialWithEmptyWindowIsInsufficient) {
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "keys/app_private_key.pem");
    DeterministicBackend backend;
    const auto a = analyze_context(c, backend, default_prompt_templates());
    EXPECT_TRUE(a.indicators.empty());
    EXPECT_EQ(a.judgment, ContextJudgment::Insufficient);
}

TEST(AnalyzeContext, LiveClientConstructionIsOperational) {
    auto c = testutil::make_candidate(SecretType::Aws, "AKIAQ7R2XKV9ZW4PMJT6", "src/app.py",
                                      "session = boto3.Session()\nclient = session.client(\n    \"s3\", ",
                                      ")\nclient.upload()");
    DeterministicBackend backend;
    const auto a = analyze_context(c, backend, default_prompt_templates());
    EXPECT_EQ(a.judgment, ContextJudgment::Operational);
    bool saw_production_hint = false;
    for (const auto& ind : a.indicators) {
        if (ind.kind == IndicatorKind::ProductionHint) saw_production_hint = true;
    }
    EXPECT_TRUE(saw_production_hint);
}

TEST(AnalyzeContext, TestPathComponentIsAMarker) {
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "test/fixtures/server.pem");
    DeterministicBackend backend;
    const auto a = analyze_context(c, backend, default_prompt_templates());
    EXPECT_EQ(a.judgment, ContextJudgment::Illustrative);
    bool saw_test_marker = false;
    for (const auto& ind : a.indicators) {
        if (ind.kind == IndicatorKind::TestMarker) saw_test_marker = true;
    }
    EXPECT_TRUE(saw_test_marker);
}

TEST(AnalyzeContext, BackendFailureIsInsufficientWithNote) {
    class FailingBackend final : public AnalysisBackend {
    public:
        BackendReply complete(const std::string&) override {
            return {false, "", "synthetic outage", {}};
        }
        std::string name() const override { return "failing"; }
    } backend;
    auto c = testutil::make_candidate(SecretType::Aws, "AKIAQ7R2XKV9ZW4PMJT6", "src/app.py",
                                      "client = boto.client(", ")");
    const auto a = analyze_context(c, backend, default_prompt_templates());
    EXPECT_EQ(a.judgment, ContextJudgment::Insufficient);
    ASSERT_TRUE(a.error_note.has_value());
}

// ---------------------------------------------------------------------------
// build_reference_index

TEST(BuildReferenceIndex, PayScriptReferencesKeyFile) {
    TempDir dir("refpay");
    testutil::make_payapp_repo(dir.path());
    const auto graph = build_reference_index(dir.path());
    ASSERT_TRUE(graph.edges.count("pay.py"));
    ASSERT_TRUE(graph.edges.at("pay.py").count("keys/app_private_key.pem"));
    const auto& sites = graph.edges.at("pay.py").at("keys/app_private_key.pem");
    ASSERT_FALSE(sites.empty());
    EXPECT_EQ(sites[0].line, 2u);
    EXPECT_NE(sites[0].snippet.find("app_private_key.pem"), std::string::npos);
}

TEST(BuildReferenceIndex, NoCrossMentionsNoEdges) {
    TempDir dir("refnone");
    write_file(dir.path(), "alpha.py", "print('alpha only')\n");
    write_file(dir.path(), "beta.py", "print('beta only')\n");
    const auto graph = build_reference_index(dir.path());
    EXPECT_TRUE(graph.edges.empty());
    EXPECT_EQ(graph.nodes.size(), 2u);
}

TEST(BuildReferenceIndex, SelfMentionIsNotAnEdge) {
    TempDir dir("refself");
    write_file(dir.path(), "a.txt", "this file is a.txt mentioning itself\n");
    const auto graph = build_reference_index(dir.path());
    EXPECT_TRUE(graph.edges.empty());
}

TEST(BuildReferenceIndex, WordBoundariesRespected) {
    TempDir dir("refbound");
    write_file(dir.path(), "key.pem", testutil::sample_private_key() + "\n");
    write_file(dir.path(), "uses.py", "load(\"key.pem\")\n");
    write_file(dir.path(), "nouses.py", "monkey.pemberton()\nkey_material = None\nturkey\n");
    const auto graph = build_reference_index(dir.path());
    ASSERT_TRUE(graph.edges.count("uses.py"));
    // "monkey.pemberton" must not match basename "key.pem"; "key_material"
    // and "turkey" must not match stem "key".
    EXPECT_FALSE(graph.edges.count("nouses.py"));
}

TEST(BuildReferenceIndex, IdempotentAndMatchesOracleOnFixtures) {
    for (int fixture = 0; fixture < 2; ++fixture) {
        TempDir dir("reforacle");
        if (fixture == 0) testutil::make_payapp_repo(dir.path());
        else testutil::make_testkeys_repo(dir.path());
        const auto once = build_reference_index(dir.path());
        const auto twice = build_reference_index(dir.path());
        EXPECT_EQ(once, twice);
        EXPECT_EQ(once, testutil::reference_oracle(dir.path()));
    }
}

TEST(BuildReferenceIndex, MatchesOracleOnRandomizedRepo) {
    std::mt19937 rng(31337);
    TempDir dir("reffuzz");
    std::vector<std::string> names;
    const char* dirs[] = {"", "src/", "test/", "lib/deep/"};
    const char* stems[] = {"alpha", "beta_gamma", "delta1", "pay", "server-key", "config.sub"};
    const char* exts[] = {".py", ".txt", ".pem", ""};
    for (int i = 0; i < 18; ++i) {
        const std::string name = std::string(dirs[i % 4]) + stems[i % 6] +
                                 (i % 6 == 4 ? std::to_string(i) : "") + exts[i % 4];
        if (std::find(names.begin(), names.end(), name) != names.end()) continue;
        names.push_back(name);
    }
    std::uniform_int_distribution<std::size_t> pick_name(0, names.size() - 1);
    std::uniform_int_distribution<int> words(0, 9);
    const char* fillers[] = {"load",    "return", "monkey", "value",   "import",
                             "the",     "path",   "stream", "handler", "x1"};
    for (const auto& name : names) {
        std::string content;
        for (int line = 0; line < 6; ++line) {
            for (int w = 0; w < 5; ++w) {
                const int k = words(rng);
                if (k < 3) {
                    const auto& other = names[pick_name(rng)];
                    // Mention sometimes quoted, sometimes glued to word chars.
                    if (k == 0) content += "\"" + other + "\" ";
                    else if (k == 1) content += other + " ";
                    else content += "pre" + other + " ";
                } else {
                    content += std::string(fillers[k]) + " ";
                }
            }
            content += "\n";
        }
        write_file(dir.path(), name, content);
    }
    const auto graph = build_reference_index(dir.path());
    EXPECT_EQ(graph, testutil::reference_oracle(dir.path()));
}

TEST(BuildReferenceIndex, ExcludesBinaryAndOversizeFiles) {
    TempDir dir("refbin");
    std::string binary = "refers to target.txt";
    binary.push_back('\0');
    write_file(dir.path(), "blob.bin", binary);
    write_file(dir.path(), "target.txt", "plain\n");
    write_file(dir.path(), "mentions_blob.py", "open('blob.bin')\n");
    const auto graph = build_reference_index(dir.path());
    EXPECT_FALSE(graph.nodes.count("blob.bin"));
    EXPECT_FALSE(graph.edges.count("blob.bin"));
    // blob.bin is not a node, so it cannot be a referenced target either.
    EXPECT_FALSE(graph.edges.count("mentions_blob.py"));
}

// ---------------------------------------------------------------------------
// analyze_references

TEST(AnalyzeReferences, ProductionUsageWithDecisiveSite) {
    TempDir dir("refprod");
    testutil::make_payapp_repo(dir.path());
    const auto graph = build_reference_index(dir.path());
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "keys/app_private_key.pem");
    DeterministicBackend backend;
    const auto a = analyze_references(c, graph, backend, default_prompt_templates());
    EXPECT_EQ(a.usage, UsageClass::Production);
    ASSERT_TRUE(a.decisive_site.has_value());
    EXPECT_EQ(a.decisive_site->referencing_file, "pay.py");
}

TEST(AnalyzeReferences, TestOnlyPathsAreTestOrDemo) {
    TempDir dir("reftest");
    testutil::make_testkeys_repo(dir.path());
    const auto graph = build_reference_index(dir.path());
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "integration/https/server-key.pem");
    DeterministicBackend backend;
    const auto a = analyze_references(c, graph, backend, default_prompt_templates());
    EXPECT_EQ(a.usage, UsageClass::TestOrDemo);
    ASSERT_FALSE(a.sites.empty());
    for (const auto& s : a.sites) EXPECT_TRUE(s.test_or_demo);
}

TEST(AnalyzeReferences, NoEdgesMeansUnreferenced) {
    TempDir dir("reflone");
    write_file(dir.path(), "keys/lone.pem", testutil::sample_private_key() + "\n");
    write_file(dir.path(), "main.py", "print('no key usage')\n");
    const auto graph = build_reference_index(dir.path());
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "keys/lone.pem");
    DeterministicBackend backend;
    const auto a = analyze_references(c, graph, backend, default_prompt_templates());
    EXPECT_EQ(a.usage, UsageClass::Unreferenced);
    EXPECT_TRUE(a.sites.empty());
}

TEST(AnalyzeReferences, BackendFailureFallsBackToSiteMajority) {
    class FailingBackend final : public AnalysisBackend {
    public:
        BackendReply complete(const std::string&) override {
            return {false, "", "synthetic outage", {}};
        }
        std::string name() const override { return "failing"; }
    } backend;
    TempDir dir("refmaj");
    testutil::make_payapp_repo(dir.path());
    const auto graph = build_reference_index(dir.path());
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "keys/app_private_key.pem");
    const auto a = analyze_references(c, graph, backend, default_prompt_templates());
    EXPECT_EQ(a.usage, UsageClass::Production);  // majority of sites are production
    ASSERT_TRUE(a.error_note.has_value());
}

// ---------------------------------------------------------------------------
// run_advanced_check

namespace {

MemoryPool pool_with_basic(const CandidateSecret& c) {
    MemoryPool pool;
    pool.set_facts(json{{"candidate", to_json(c)}});
    pool.append_transcript("key_format_verification", "d", json{{"conforms", true}});
    pool.append_transcript("placeholder_detection", "d", json{{"found", false}});
    pool.append_transcript("readability_score", "d", json{{"word_fraction", 0.0}});
    pool.append_conclusion("basic", 0, json{{"suspicion", "genuine"}},
                           {"key_format_verification"});
    return pool;
}

bool has_reference_transcript(const MemoryPool& pool) {
    return pool.has_transcript("reference_checking");
}

}  // namespace

TEST(RunAdvancedCheck, IllustrativeContextSkipsReferenceAnalysis) {
    auto c = testutil::make_candidate(SecretType::Aws, "AKIAQ7R2XKV9ZW4PMJT6", "docs/usage.md",
                                      "For example, a sample key:\n", "");
    MemoryPool pool = pool_with_basic(c);
    ReferenceGraph graph;
    DeterministicBackend backend;
    const auto report =
        run_advanced_check(c, pool, graph, backend, {}, default_prompt_templates(), 1);
    EXPECT_EQ(report.recommendation, Indication::FalsePositiveIndicated);
    EXPECT_EQ(report.context_judgment, ContextJudgment::Illustrative);
    EXPECT_FALSE(report.usage.has_value());
    EXPECT_FALSE(has_reference_transcript(pool));  // gating
    EXPECT_TRUE(pool.has_transcript("context_checking"));
}

TEST(RunAdvancedCheck, InsufficientThenProductionIsGenuine) {
    TempDir dir("advprod");
    testutil::make_payapp_repo(dir.path());
    const auto graph = build_reference_index(dir.path());
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "keys/app_private_key.pem");
    MemoryPool pool = pool_with_basic(c);
    DeterministicBackend backend;
    const auto report =
        run_advanced_check(c, pool, graph, backend, {}, default_prompt_templates(), 1);
    EXPECT_EQ(report.context_judgment, ContextJudgment::Insufficient);
    EXPECT_EQ(report.recommendation, Indication::Genuine);
    EXPECT_FALSE(report.low_confidence);
    ASSERT_TRUE(report.usage.has_value());
    EXPECT_EQ(*report.usage, UsageClass::Production);
    EXPECT_TRUE(has_reference_transcript(pool));
    ASSERT_TRUE(report.decisive_site.has_value());
    EXPECT_EQ(report.decisive_site->referencing_file, "pay.py");
}

TEST(RunAdvancedCheck, InsufficientThenUnreferencedIsGenuineLowConfidence) {
    TempDir dir("advlone");
    write_file(dir.path(), "keys/lone.pem", testutil::sample_private_key() + "\n");
    const auto graph = build_reference_index(dir.path());
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "keys/lone.pem");
    MemoryPool pool = pool_with_basic(c);
    DeterministicBackend backend;
    const auto report =
        run_advanced_check(c, pool, graph, backend, {}, default_prompt_templates(), 1);
    EXPECT_EQ(report.recommendation, Indication::Genuine);
    EXPECT_TRUE(report.low_confidence);
    ASSERT_TRUE(report.usage.has_value());
    EXPECT_EQ(*report.usage, UsageClass::Unreferenced);
}

TEST(RunAdvancedCheck, Level3DisabledFlagsConservatively) {
    auto c = testutil::make_candidate(SecretType::PrivateKey, testutil::sample_private_key(),
                                      "keys/lone.pem");
    MemoryPool pool = pool_with_basic(c);
    ReferenceGraph graph;
    DeterministicBackend backend;
    AdvancedToolset tools;
    tools.allow_reference_check = false;
    const auto report =
        run_advanced_check(c, pool, graph, backend, tools, default_prompt_templates(), 1);
    EXPECT_EQ(report.recommendation, Indication::Genuine);
    EXPECT_TRUE(report.low_confidence);
    EXPECT_FALSE(has_reference_transcript(pool));
}

TEST(RunAdvancedCheck, AppendsExactlyOneConclusion) {
    auto c = testutil::make_candidate(SecretType::Aws, "AKIAQ7R2XKV9ZW4PMJT6", "docs/usage.md",
                                      "example\n", "");
    MemoryPool pool = pool_with_basic(c);
    const std::size_t before = pool.tier3().size();
    ReferenceGraph graph;
    DeterministicBackend backend;
    run_advanced_check(c, pool, graph, backend, {}, default_prompt_templates(), 1);
    EXPECT_EQ(pool.tier3().size(), before + 1);
    EXPECT_EQ(pool.tier3().back().agent, "advanced");
}
