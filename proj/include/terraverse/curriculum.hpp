#pragma once

#include <terraverse/rng.hpp>

#include <json.hpp>

#include <vector>

namespace terraverse {

/// Promotion/demotion thresholds of the per-terrain difficulty ladder.
struct LadderConfig {
    double g_promote = 8 * 0.8;
    double g_demote = 8 * 0.4;
    double p_stay = 0.75;
    int levels = 10;

    /// Throws ConfigError unless 0 <= g_demote < g_promote <= 8 and 0 <= p_stay <= 1.
    void validate() const;
};

struct LadderStep {
    int level;
    double goals_reached;
    friend bool operator==(const LadderStep&, const LadderStep&) = default;
};

struct CurriculumState {
    int level = 1;
    std::vector<LadderStep> history;
    friend bool operator==(const CurriculumState&, const CurriculumState&) = default;
};

/// goals >= g_promote promotes, goals < g_demote demotes; otherwise stay with
/// probability p_stay or drop to a uniformly random lower level.
CurriculumState update(const CurriculumState& st, double goals_reached, Rng& rng, const LadderConfig& cfg = {});

/// Level k in 1..levels maps to d = (k - 1) / (levels - 1).
double level_to_difficulty(int k, int levels = 10);

void to_json(nlohmann::json& j, const CurriculumState& st);
void to_json(nlohmann::json& j, const LadderConfig& cfg);
void from_json(const nlohmann::json& j, LadderConfig& cfg);

} // namespace terraverse
