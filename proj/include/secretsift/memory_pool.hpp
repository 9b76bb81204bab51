#pragma once
// The three-tier shared memory pool. One pool per verification session:
// tier 1 holds candidate facts, tier 2 raw tool transcripts, tier 3 refined
// conclusions. Tiers 2 and 3 are append-only; nothing is ever removed or
// mutated. Timestamps are a per-session logical clock, so a session's pool
// is a pure function of its inputs.

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "secretsift/core.hpp"

namespace secretsift {

struct Transcript {
    std::string tool;
    std::string input_digest;
    json output;
    std::uint64_t timestamp = 0;

    bool operator==(const Transcript&) const = default;
};

struct Conclusion {
    std::string agent;
    int iteration = 0;
    json record;
    std::uint64_t timestamp = 0;

    bool operator==(const Conclusion&) const = default;
};

class MemoryPool {
public:
    MemoryPool() = default;

    void set_facts(json facts) { tier1_ = std::move(facts); }
    const json& tier1() const { return tier1_; }

    void append_transcript(std::string tool, std::string input_digest, json output) {
        tier2_.push_back({std::move(tool), std::move(input_digest), std::move(output), clock_++});
    }

    /// Appends a refined conclusion. Every cited tool must already have a
    /// transcript in tier 2 of this session.
    void append_conclusion(std::string agent, int iteration, json record,
                           const std::vector<std::string>& cited_tools) {
        for (const auto& tool : cited_tools) {
            if (!has_transcript(tool)) {
                throw std::logic_error("conclusion cites tool without transcript: " + tool);
            }
        }
        tier3_.push_back({std::move(agent), iteration, std::move(record), clock_++});
    }

    bool has_transcript(const std::string& tool) const {
        for (const auto& t : tier2_) {
            if (t.tool == tool) return true;
        }
        return false;
    }

    const std::vector<Transcript>& tier2() const { return tier2_; }
    const std::vector<Conclusion>& tier3() const { return tier3_; }

    /// Latest tier-3 record for an agent, or nullptr.
    const Conclusion* latest_conclusion(const std::string& agent) const {
        for (auto it = tier3_.rbegin(); it != tier3_.rend(); ++it) {
            if (it->agent == agent) return &*it;
        }
        return nullptr;
    }

    /// Number of accumulated entries across tiers 2 and 3 (the growth metric
    /// for pool monotonicity).
    std::size_t size() const { return tier2_.size() + tier3_.size(); }

    json to_json() const {
        json t2 = json::array();
        for (const auto& t : tier2_) {
            t2.push_back({{"tool", t.tool},
                          {"input_digest", t.input_digest},
                          {"output", t.output},
                          {"timestamp", t.timestamp}});
        }
        json t3 = json::array();
        for (const auto& c : tier3_) {
            t3.push_back({{"agent", c.agent},
                          {"iteration", c.iteration},
                          {"record", c.record},
                          {"timestamp", c.timestamp}});
        }
        return json{{"tier1", tier1_}, {"tier2", t2}, {"tier3", t3}};
    }

    static MemoryPool from_json(const json& j) {
        MemoryPool pool;
        pool.tier1_ = j.at("tier1");
        for (const auto& t : j.at("tier2")) {
            pool.tier2_.push_back({t.at("tool").get<std::string>(),
                                   t.at("input_digest").get<std::string>(), t.at("output"),
                                   t.at("timestamp").get<std::uint64_t>()});
        }
        for (const auto& c : j.at("tier3")) {
            pool.tier3_.push_back({c.at("agent").get<std::string>(), c.at("iteration").get<int>(),
                                   c.at("record"), c.at("timestamp").get<std::uint64_t>()});
        }
        for (const auto& t : pool.tier2_) pool.clock_ = std::max(pool.clock_, t.timestamp + 1);
        for (const auto& c : pool.tier3_) pool.clock_ = std::max(pool.clock_, c.timestamp + 1);
        return pool;
    }

    /// Levels exercised so far, derived from tier-2 tool names.
    std::set<int> levels_used() const {
        std::set<int> levels;
        for (const auto& t : tier2_) {
            if (t.tool == "key_format_verification" || t.tool == "placeholder_detection" ||
                t.tool == "readability_score") {
                levels.insert(1);
            } else if (t.tool == "context_checking") {
                levels.insert(2);
            } else if (t.tool == "reference_checking") {
                levels.insert(3);
            }
        }
        return levels;
    }

private:
    json tier1_;
    std::vector<Transcript> tier2_;
    std::vector<Conclusion> tier3_;
    std::uint64_t clock_ = 0;
};

}  // namespace secretsift
