#pragma once
// The commander: decides, dispatches the basic/advanced check agents over
// the session's memory pool, and terminates with a verdict. The loop is
// bounded; hitting the bound yields an honest Undetermined.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "secretsift/advanced_check.hpp"
#include "secretsift/backend.hpp"
#include "secretsift/basic_check.hpp"
#include "secretsift/core.hpp"
#include "secretsift/memory_pool.hpp"
#include "secretsift/prompts.hpp"

namespace secretsift {

// ---------------------------------------------------------------------------
// Decisions

enum class AgentKind { Basic, Advanced };

inline std::string to_string(AgentKind a) { return a == AgentKind::Basic ? "basic" : "advanced"; }

struct Decision {
    enum class Kind { Dispatch, Final } kind = Kind::Dispatch;
    AgentKind agent = AgentKind::Basic;                            // Dispatch
    Classification classification = Classification::Undetermined;  // Final
    Confidence confidence = Confidence::Low;                       // Final
    std::vector<std::string> reasons;                              // Final, >= 1

    static Decision dispatch(AgentKind a) {
        Decision d;
        d.kind = Kind::Dispatch;
        d.agent = a;
        return d;
    }

    static Decision make_final(Classification c, Confidence conf, std::vector<std::string> reasons) {
        Decision d;
        d.kind = Kind::Final;
        d.classification = c;
        d.confidence = conf;
        d.reasons = std::move(reasons);
        if (d.reasons.empty()) d.reasons.push_back("no reason recorded");
        return d;
    }
};

enum class Path { Basic, Advanced, End };

/// Path selection: Dispatch maps to its agent, Final maps to END. Total.
inline Path select_path(const Decision& d) {
    if (d.kind == Decision::Kind::Final) return Path::End;
    return d.agent == AgentKind::Basic ? Path::Basic : Path::Advanced;
}

// ---------------------------------------------------------------------------
// Commander decision

struct VerifyLimits {
    int max_iterations = 4;
    bool allow_level2 = true;
    bool allow_level3 = true;
};

struct DecideOutcome {
    Decision decision;
    bool fail_safe = false;  // backend reply was unusable
};

namespace detail {

inline json tier3_record_or_null(const MemoryPool& pool, const std::string& agent) {
    const Conclusion* c = pool.latest_conclusion(agent);
    return c ? c->record : json(nullptr);
}

}  // namespace detail

/// One commander decision over the current pool state. An unusable backend
/// reply degrades fail-safe: dispatch Basic on the first decision, otherwise
/// finalize Undetermined.
inline DecideOutcome commander_decide(const MemoryPool& pool, const CandidateSecret& c,
                                      int iteration, AnalysisBackend& backend,
                                      const PromptTemplates& templates) {
    const json evidence{{"stage", "commander"},
                        {"iteration", iteration},
                        {"file_kind", to_string(c.context.file_kind)},
                        {"entropy_bits", c.entropy_bits},
                        {"basic", detail::tier3_record_or_null(pool, "basic")},
                        {"advanced", detail::tier3_record_or_null(pool, "advanced")}};
    char entropy_buf[32];
    std::snprintf(entropy_buf, sizeof(entropy_buf), "%.3f", c.entropy_bits);
    const std::string prompt =
        render_template(templates.p_gen, {{"key", c.raw_value},
                                          {"file_path", c.location.file_path},
                                          {"file_kind", to_string(c.context.file_kind)},
                                          {"entropy_bits", entropy_buf},
                                          {"tool_results", "```json\n" + evidence.dump() + "\n```"}});

    auto fail_safe = [&](const std::string& why) {
        DecideOutcome out;
        out.fail_safe = true;
        if (iteration == 0) {
            out.decision = Decision::dispatch(AgentKind::Basic);
        } else {
            out.decision = Decision::make_final(Classification::Undetermined, Confidence::Low,
                                           {"commander reply unusable (" + why + "); fail-safe stop"});
        }
        return out;
    };

    const BackendReply reply = backend.complete(prompt);
    if (!reply.ok) return fail_safe("backend error: " + reply.error);
    const auto parsed = extract_first_json_object(reply.text);
    if (!parsed || !parsed->contains("action") || !(*parsed)["action"].is_string()) {
        return fail_safe("no action field");
    }
    const std::string action = (*parsed)["action"].get<std::string>();
    if (action == "dispatch") {
        const std::string agent = parsed->value("agent", std::string());
        if (agent == "basic") return {Decision::dispatch(AgentKind::Basic), false};
        if (agent == "advanced") return {Decision::dispatch(AgentKind::Advanced), false};
        return fail_safe("unknown agent '" + agent + "'");
    }
    if (action == "final") {
        const auto classification =
            classification_from_string(parsed->value("classification", std::string()));
        if (!classification) return fail_safe("unknown classification");
        const Confidence confidence =
            parsed->value("confidence", std::string("low")) == "high" ? Confidence::High
                                                                      : Confidence::Low;
        std::vector<std::string> reasons;
        if (parsed->contains("reasons") && (*parsed)["reasons"].is_array()) {
            for (const auto& r : (*parsed)["reasons"]) {
                if (r.is_string()) reasons.push_back(r.get<std::string>());
            }
        }
        return {Decision::make_final(*classification, confidence, std::move(reasons)), false};
    }
    return fail_safe("unknown action '" + action + "'");
}

// ---------------------------------------------------------------------------
// Verification session

struct VerifyToolsets {
    BasicToolset basic;
    AdvancedToolset advanced;
};

/// Runs the full commander loop for one candidate: initialize the pool with
/// tier-1 facts, decide, dispatch, accumulate, re-decide, until END or the
/// iteration bound. The verdict carries the final pool snapshot.
inline Verdict verify_candidate(const CandidateSecret& c, const ReferenceGraph& graph,
                                AnalysisBackend& backend, const VerifyLimits& limits,
                                const VerifyToolsets& toolsets,
                                const PromptTemplates& templates = default_prompt_templates(),
                                const std::string& repo_label = "") {
    MemoryPool pool;
    pool.set_facts(json{{"candidate", to_json(c)},
                        {"repo", json{{"root", repo_label}, {"schema_version", kSchemaVersion}}}});

    Verdict verdict;
    verdict.candidate_id = c.id;

    std::vector<std::string> incident_notes;
    int iteration = 0;
    DecideOutcome outcome = commander_decide(pool, c, iteration, backend, templates);
    if (outcome.fail_safe) incident_notes.push_back("commander fail-safe at iteration 0");

    for (;;) {
        if (select_path(outcome.decision) == Path::End) {
            verdict.classification = outcome.decision.classification;
            verdict.confidence = outcome.decision.confidence;
            verdict.reasons = outcome.decision.reasons;
            break;
        }
        if (iteration >= limits.max_iterations) {
            verdict.classification = Classification::Undetermined;
            verdict.confidence = Confidence::Low;
            verdict.reasons = {"iteration bound of " + std::to_string(limits.max_iterations) +
                               " reached without a final decision"};
            break;
        }

        AgentKind agent = outcome.decision.agent;
        if (agent == AgentKind::Advanced && !limits.allow_level2) {
            // Level-1-only ablation: the commander cannot go deeper; close out
            // with what the basic agent concluded.
            const Conclusion* basic = pool.latest_conclusion("basic");
            const bool genuine = basic && basic->record.value("suspicion", std::string()) == "genuine";
            verdict.classification = genuine ? Classification::TrueLeak : Classification::FalsePositive;
            verdict.confidence = Confidence::Low;
            verdict.reasons = {"advanced analysis disabled; closing on level-1 evidence"};
            break;
        }

        try {
            if (agent == AgentKind::Basic) {
                run_basic_check(c, pool, backend, toolsets.basic, templates, iteration);
            } else {
                AdvancedToolset advanced = toolsets.advanced;
                advanced.allow_reference_check = advanced.allow_reference_check && limits.allow_level3;
                run_advanced_check(c, pool, graph, backend, advanced, templates, iteration);
            }
        } catch (const std::exception& e) {
            pool.append_transcript(to_string(agent) + "_agent_error", digest_of(c.id),
                                   json{{"error", e.what()}});
            incident_notes.push_back(to_string(agent) + " agent failed: " + std::string(e.what()));
        }
        ++iteration;
        outcome = commander_decide(pool, c, iteration, backend, templates);
        if (outcome.fail_safe) {
            incident_notes.push_back("commander fail-safe at iteration " + std::to_string(iteration));
        }
    }

    for (const auto& note : incident_notes) verdict.reasons.push_back(note);
    verdict.levels_used = pool.levels_used();
    verdict.pool_snapshot = pool.to_json();
    return verdict;
}

}  // namespace secretsift
