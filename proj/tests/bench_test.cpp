// Bench harness: manifest loading, verdict/label matching, metric math,
// and report rendering.

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "secretsift/bench.hpp"
#include "testutil.hpp"

using namespace secretsift;
using testutil::TempDir;
using testutil::write_file;

namespace {

ManifestEntry entry(const std::string& repo, const std::string& file, SecretType t, Label label,
                    const std::string& group = "") {
    ManifestEntry e{repo, file, t, label, std::nullopt};
    if (!group.empty()) e.language_group = group;
    return e;
}

ScoredFinding finding(const std::string& repo, const std::string& file, SecretType t,
                      Classification c) {
    return {repo, file, t, c};
}

}  // namespace

// ---------------------------------------------------------------------------
// load_manifest

TEST(LoadManifest, ValidTwoEntryFile) {
    TempDir dir("man1");
    write_file(dir.path(), "m.jsonl",
               R"({"repo_path":"r1","file":"a.py","secret_type":"AWS","label":"true_leak"})"
               "\n"
               R"({"repo_path":"r1","file":"b.md","secret_type":"MongoDB","label":"false_positive","language_group":"docs"})"
               "\n");
    const auto m = load_manifest(dir.path() / "m.jsonl");
    ASSERT_EQ(m.entries.size(), 2u);
    EXPECT_EQ(m.entries[0].secret_type, SecretType::Aws);
    EXPECT_EQ(m.entries[0].label, Label::TrueLeakLabel);
    ASSERT_TRUE(m.entries[1].language_group.has_value());
    EXPECT_EQ(*m.entries[1].language_group, "docs");
}

TEST(LoadManifest, DuplicateKeyNamesBothLines) {
    TempDir dir("man2");
    write_file(dir.path(), "m.jsonl",
               R"({"repo_path":"r1","file":"a.py","secret_type":"AWS","label":"true_leak"})"
               "\n"
               R"({"repo_path":"r1","file":"a.py","secret_type":"AWS","label":"false_positive"})"
               "\n");
    try {
        load_manifest(dir.path() / "m.jsonl");
        FAIL() << "expected duplicate-key error";
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("line 2"), std::string::npos);
        EXPECT_NE(what.find("line 1"), std::string::npos);
    }
}

TEST(LoadManifest, UnknownSecretTypeNamesTheValue) {
    TempDir dir("man3");
    write_file(dir.path(), "m.jsonl",
               R"({"repo_path":"r1","file":"a.py","secret_type":"FooCloud","label":"true_leak"})"
               "\n");
    try {
        load_manifest(dir.path() / "m.jsonl");
        FAIL() << "expected unknown-type error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("FooCloud"), std::string::npos);
    }
}

TEST(LoadManifest, SchemaViolationCarriesLineNumber) {
    TempDir dir("man4");
    write_file(dir.path(), "m.jsonl",
               R"({"repo_path":"r1","file":"a.py","secret_type":"AWS","label":"true_leak"})"
               "\n"
               R"({"repo_path":"r1","file":"b.py","label":"true_leak"})"
               "\n");
    try {
        load_manifest(dir.path() / "m.jsonl");
        FAIL() << "expected schema error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("secret_type"), std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// match_and_score

TEST(MatchAndScore, ReconstructedConfusionMatrixMatchesPublishedMetrics) {
    LabeledManifest manifest;
    std::vector<ScoredFinding> findings;
    int file_counter = 0;
    auto add = [&](Label label, Classification predicted, int count) {
        for (int i = 0; i < count; ++i) {
            const std::string file = "f" + std::to_string(file_counter++) + ".py";
            manifest.entries.push_back(entry("repo", file, SecretType::Aws, label));
            findings.push_back(finding("repo", file, SecretType::Aws, predicted));
        }
    };
    add(Label::TrueLeakLabel, Classification::TrueLeak, 53);            // tp
    add(Label::FalsePositiveLabel, Classification::TrueLeak, 2);        // fp
    add(Label::TrueLeakLabel, Classification::FalsePositive, 3);        // fn
    add(Label::FalsePositiveLabel, Classification::FalsePositive, 39);  // tn

    const EvalMetrics m = match_and_score(findings, manifest);
    EXPECT_EQ(m.counts, (ConfusionCounts{53, 2, 3, 39}));
    ASSERT_TRUE(m.values.precision && m.values.recall && m.values.f1);
    EXPECT_NEAR(*m.values.precision, 0.9636, 5e-5);
    EXPECT_NEAR(*m.values.recall, 0.9464, 5e-5);
    EXPECT_NEAR(*m.values.f1, 0.9550, 5e-5);
    EXPECT_NEAR(m.values.accuracy, 0.9485, 5e-5);
}

TEST(MatchAndScore, AllCorrectToySet) {
    LabeledManifest manifest;
    std::vector<ScoredFinding> findings;
    for (int i = 0; i < 10; ++i) {
        const std::string file = "f" + std::to_string(i) + ".py";
        const bool positive = i % 2 == 0;
        manifest.entries.push_back(entry("repo", file, SecretType::GitHub,
                                         positive ? Label::TrueLeakLabel : Label::FalsePositiveLabel));
        findings.push_back(finding("repo", file, SecretType::GitHub,
                                   positive ? Classification::TrueLeak : Classification::FalsePositive));
    }
    const EvalMetrics m = match_and_score(findings, manifest);
    EXPECT_DOUBLE_EQ(m.values.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(*m.values.precision, 1.0);
    EXPECT_DOUBLE_EQ(*m.values.recall, 1.0);
    EXPECT_DOUBLE_EQ(*m.values.f1, 1.0);
}

TEST(MatchAndScore, UndefinedPrecisionIsMarkedNotZero) {
    LabeledManifest manifest;
    manifest.entries.push_back(entry("repo", "a.py", SecretType::Aws, Label::TrueLeakLabel));
    const EvalMetrics m = match_and_score({}, manifest);
    EXPECT_EQ(m.counts.tp, 0u);
    EXPECT_EQ(m.counts.fn, 1u);
    EXPECT_FALSE(m.values.precision.has_value());
    ASSERT_TRUE(m.values.recall.has_value());
    EXPECT_DOUBLE_EQ(*m.values.recall, 0.0);
}

TEST(MatchAndScore, UndeterminedCountsAgainstTheTool) {
    LabeledManifest manifest;
    manifest.entries.push_back(entry("repo", "pos.py", SecretType::Aws, Label::TrueLeakLabel));
    manifest.entries.push_back(entry("repo", "neg.py", SecretType::Aws, Label::FalsePositiveLabel));
    const std::vector<ScoredFinding> findings = {
        finding("repo", "pos.py", SecretType::Aws, Classification::Undetermined),
        finding("repo", "neg.py", SecretType::Aws, Classification::Undetermined),
    };
    const EvalMetrics m = match_and_score(findings, manifest);
    EXPECT_EQ(m.counts, (ConfusionCounts{0, 1, 1, 0}));  // fn on positive, fp on negative
}

TEST(MatchAndScore, ExtraFindingsExcludedByDefaultCountedStrictly) {
    LabeledManifest manifest;
    manifest.entries.push_back(entry("repo", "a.py", SecretType::Aws, Label::TrueLeakLabel));
    const std::vector<ScoredFinding> findings = {
        finding("repo", "a.py", SecretType::Aws, Classification::TrueLeak),
        finding("repo", "unlisted.py", SecretType::Redis, Classification::TrueLeak),
    };
    const EvalMetrics lax = match_and_score(findings, manifest);
    EXPECT_EQ(lax.counts, (ConfusionCounts{1, 0, 0, 0}));
    ASSERT_EQ(lax.extra_findings.size(), 1u);
    EXPECT_NE(lax.extra_findings[0].find("unlisted.py"), std::string::npos);

    const EvalMetrics strict = match_and_score(findings, manifest, UndeterminedPolicy::Strict);
    EXPECT_EQ(strict.counts, (ConfusionCounts{1, 1, 0, 0}));
}

TEST(MatchAndScore, PermutingFindingsNeverChangesMetrics) {
    std::mt19937 rng(5150);
    LabeledManifest manifest;
    std::vector<ScoredFinding> findings;
    for (int i = 0; i < 40; ++i) {
        const std::string file = "f" + std::to_string(i);
        const SecretType t = kAllSecretTypes[i % 10];
        manifest.entries.push_back(entry("repo", file, t,
                                         i % 3 ? Label::TrueLeakLabel : Label::FalsePositiveLabel,
                                         i % 2 ? "python" : "yaml"));
        if (i % 5 != 4) {
            findings.push_back(finding("repo", file, t,
                                       i % 4 ? Classification::TrueLeak
                                             : Classification::FalsePositive));
        }
    }
    const EvalMetrics base = match_and_score(findings, manifest);
    for (int round = 0; round < 10; ++round) {
        std::shuffle(findings.begin(), findings.end(), rng);
        EXPECT_EQ(match_and_score(findings, manifest), base);
    }
}

TEST(MatchAndScore, MatchesBruteForceOracleOnRandomInstances) {
    std::mt19937 rng(8086);
    std::uniform_int_distribution<int> size_dist(1, 30);
    std::uniform_int_distribution<int> label_dist(0, 1);
    std::uniform_int_distribution<int> pred_dist(0, 3);  // 3 = no finding
    for (int trial = 0; trial < 300; ++trial) {
        LabeledManifest manifest;
        std::vector<ScoredFinding> findings;
        std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
        const int n = size_dist(rng);
        for (int i = 0; i < n; ++i) {
            const std::string file = "f" + std::to_string(i);
            const bool positive = label_dist(rng) == 1;
            manifest.entries.push_back(
                entry("repo", file, SecretType::Uri,
                      positive ? Label::TrueLeakLabel : Label::FalsePositiveLabel));
            const int pred = pred_dist(rng);
            Classification effective = Classification::FalsePositive;  // absent or negative
            if (pred == 0) {
                findings.push_back(finding("repo", file, SecretType::Uri, Classification::TrueLeak));
                effective = Classification::TrueLeak;
            } else if (pred == 1) {
                findings.push_back(
                    finding("repo", file, SecretType::Uri, Classification::FalsePositive));
            } else if (pred == 2) {
                findings.push_back(
                    finding("repo", file, SecretType::Uri, Classification::Undetermined));
                // Default policy: counts against the tool on both sides.
                effective = positive ? Classification::FalsePositive : Classification::TrueLeak;
            }
            const bool flagged = effective == Classification::TrueLeak;
            if (positive && flagged) ++tp;
            else if (positive && !flagged) ++fn;
            else if (!positive && flagged) ++fp;
            else ++tn;
        }
        const EvalMetrics m = match_and_score(findings, manifest);
        EXPECT_EQ(m.counts, (ConfusionCounts{tp, fp, fn, tn})) << "trial " << trial;

        if (tp + fp > 0) {
            ASSERT_TRUE(m.values.precision.has_value());
            EXPECT_NEAR(*m.values.precision, double(tp) / double(tp + fp), 1e-12);
        } else {
            EXPECT_FALSE(m.values.precision.has_value());
        }
        if (tp + fn > 0) {
            ASSERT_TRUE(m.values.recall.has_value());
            EXPECT_NEAR(*m.values.recall, double(tp) / double(tp + fn), 1e-12);
        }
        EXPECT_NEAR(m.values.accuracy, double(tp + tn) / double(tp + fp + fn + tn), 1e-12);
    }
}

TEST(MatchAndScore, BreakdownCountsSumToGlobalMatrix) {
    LabeledManifest manifest;
    std::vector<ScoredFinding> findings;
    for (int i = 0; i < 30; ++i) {
        const std::string file = "f" + std::to_string(i);
        const SecretType t = kAllSecretTypes[i % 10];
        manifest.entries.push_back(entry("repo", file, t,
                                         i % 2 ? Label::TrueLeakLabel : Label::FalsePositiveLabel,
                                         i % 3 == 0 ? "" : (i % 3 == 1 ? "python" : "yaml")));
        findings.push_back(
            finding("repo", file, t, i % 4 ? Classification::TrueLeak : Classification::Undetermined));
    }
    const EvalMetrics m = match_and_score(findings, manifest);
    auto sum = [](const std::map<std::string, ConfusionCounts>& groups) {
        ConfusionCounts total;
        for (const auto& [name, c] : groups) {
            total.tp += c.tp;
            total.fp += c.fp;
            total.fn += c.fn;
            total.tn += c.tn;
        }
        return total;
    };
    EXPECT_EQ(sum(m.by_secret_type), m.counts);
    EXPECT_EQ(sum(m.by_language), m.counts);
}

// ---------------------------------------------------------------------------
// report rendering

TEST(Report, JsonRoundTripsToEqualMetrics) {
    LabeledManifest manifest;
    std::vector<ScoredFinding> findings;
    for (int i = 0; i < 12; ++i) {
        const std::string file = "f" + std::to_string(i);
        const SecretType t = kAllSecretTypes[i % 10];
        manifest.entries.push_back(entry("repo", file, t,
                                         i % 2 ? Label::TrueLeakLabel : Label::FalsePositiveLabel,
                                         i % 2 ? "python" : "yaml"));
        findings.push_back(finding("repo", file, t,
                                   i % 3 ? Classification::TrueLeak : Classification::FalsePositive));
    }
    const EvalMetrics m = match_and_score(findings, manifest);
    CostReport cost;
    cost.total_requests = 5;
    cost.prompt_tokens = 1000;
    cost.completion_tokens = 200;
    cost.estimated_dollars = 0.0045;
    cost.wall_seconds = 12.0;
    const json report = report_json_with_units(m, cost, 3);
    EXPECT_EQ(report.at("schema_version").get<std::string>(), kSchemaVersion);
    const EvalMetrics back = metrics_from_report_json(report);
    EXPECT_EQ(back.counts, m.counts);
    EXPECT_EQ(back.by_secret_type, m.by_secret_type);
    EXPECT_EQ(back.by_language, m.by_language);
}

TEST(Report, TextRenderingListsGroupsAlphabetically) {
    LabeledManifest manifest;
    std::vector<ScoredFinding> findings;
    for (int i = 0; i < 10; ++i) {
        const std::string file = "f" + std::to_string(i);
        manifest.entries.push_back(
            entry("repo", file, kAllSecretTypes[i], Label::TrueLeakLabel, "python"));
        findings.push_back(finding("repo", file, kAllSecretTypes[i], Classification::TrueLeak));
    }
    const EvalMetrics m = match_and_score(findings, manifest);
    const std::string text = render_report_text(report_json_with_units(m, {}, 1));

    std::vector<std::string> expected_order;
    for (SecretType t : kAllSecretTypes) expected_order.push_back(to_string(t));
    std::sort(expected_order.begin(), expected_order.end());
    std::size_t cursor = text.find("by_secret_type");
    ASSERT_NE(cursor, std::string::npos);
    for (const auto& name : expected_order) {
        const std::size_t at = text.find("  " + name, cursor);
        ASSERT_NE(at, std::string::npos) << "missing row " << name;
        EXPECT_GE(at, cursor);
        cursor = at;
    }
    EXPECT_NE(text.find("total cost ($)"), std::string::npos);
    EXPECT_NE(text.find("avg time (min)"), std::string::npos);
}

TEST(Report, TwoGroupBreakdownRendersTwoRows) {
    LabeledManifest manifest;
    manifest.entries.push_back(entry("r", "a.py", SecretType::Aws, Label::TrueLeakLabel, "python"));
    manifest.entries.push_back(
        entry("r", "b.yml", SecretType::Redis, Label::FalsePositiveLabel, "yaml"));
    const std::vector<ScoredFinding> findings = {
        finding("r", "a.py", SecretType::Aws, Classification::TrueLeak)};
    const EvalMetrics m = match_and_score(findings, manifest);
    const std::string text = render_report_text(report_json_with_units(m, {}, 1));
    EXPECT_NE(text.find("python"), std::string::npos);
    EXPECT_NE(text.find("yaml"), std::string::npos);
}
