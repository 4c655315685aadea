#pragma once

#include <terraverse/curriculum.hpp>
#include <terraverse/sim.hpp>
#include <terraverse/validator.hpp>

#include <json.hpp>

#include <array>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace terraverse {

inline constexpr int ladder_levels = 10;

/// A program instantiated lazily at every ladder level (compiled, optionally
/// auto-fixed, analyzed). Thread-safe; analyses are immutable once built.
class LeveledTerrain {
public:
    LeveledTerrain(TerrainProgram program, GridConfig grid, std::optional<FixConfig> fix);

    const TerrainProgram& program() const { return program_; }
    /// Cached instantiation at ladder level 1..10.
    std::shared_ptr<const TerrainAnalysis> at_level(int level) const;
    /// Same result without retaining it (for one-pass sweeps over large sets).
    std::shared_ptr<const TerrainAnalysis> build(int level) const;

private:
    std::shared_ptr<const TerrainAnalysis> instantiate(int level) const;

    TerrainProgram program_;
    GridConfig grid_;
    std::optional<FixConfig> fix_;
    mutable std::mutex mutex_;
    mutable std::array<std::shared_ptr<const TerrainAnalysis>, ladder_levels> cache_;
};

using TerrainSet = std::vector<std::shared_ptr<const LeveledTerrain>>;

TerrainSet make_terrain_set(std::span<const TerrainProgram> programs, const GridConfig& grid,
                            std::optional<FixConfig> fix);

struct SkillPolicy {
    SkillVector mean = SkillVector{0.15, 0.2, 0.15, 0.15, 0.6};
    SkillVector spread = SkillVector{0.075, 0.075, 0.075, 0.075, 0.075};
    SkillVector step_cap = SkillVector{0.15, 0.15, 0.15, 0.15, 0.15};

    friend bool operator==(const SkillPolicy&, const SkillPolicy&) = default;
};

struct TrainerConfig {
    int candidates = 32;
    int generations = 8;
    int budget = 2000; // rollouts per training phase
    double elite_fraction = 0.25;
    double min_spread = 0.02;
    LadderConfig ladder;
};

struct EpisodeSummary {
    double goals = 0.0;
    double steps = 0.0;
    double edge_violations = 0.0;
};

struct TerrainTrainStats {
    std::string terrain;
    EpisodeSummary before; // phase-start policy, averaged over all ladder levels
    EpisodeSummary after;  // phase-end policy, same levels
    int final_level = 1;
};

struct TrainStats {
    std::vector<TerrainTrainStats> per_terrain;
    EpisodeSummary before;
    EpisodeSummary after;
    int evaluations_used = 0;
    int generations_run = 0;
};

/// Mean outcome of `skill` on one terrain across all ladder levels.
EpisodeSummary summarize_all_levels(const LeveledTerrain& terrain, const SkillVector& skill);

/// One training phase: cross-entropy search over skill vectors within
/// +-step_cap of the phase-start mean, scored on the library at the current
/// ladder levels. `ladder` holds one state per library terrain and is updated
/// in place. Throws EmptyLibrary if the library is empty.
std::pair<SkillPolicy, TrainStats> train_agent(const SkillPolicy& policy, const TerrainSet& library,
                                               std::vector<CurriculumState>& ladder, Rng& rng,
                                               const TrainerConfig& cfg = {});

/// Mean goals of policy.mean over every proxy terrain at every ladder level.
double evaluate_proxy(const SkillPolicy& policy, const TerrainSet& proxy);

/// Scores several policies terrain-major, so each analysis is built once.
std::vector<double> evaluate_proxy_batch(std::span<const SkillPolicy> policies, const TerrainSet& proxy);

/// Rank-weighted draw: the best-scoring policy is picked with weights[0], the
/// second with weights[1], and so on. Ties rank the lower index first.
std::size_t soft_select(std::span<const double> scores, std::span<const double> weights, Rng& rng);

/// Default weights (0.75, 0.25, 0, ...) for n policies.
std::vector<double> default_selection_weights(std::size_t n);

void to_json(nlohmann::json& j, const SkillPolicy& p);
void from_json(const nlohmann::json& j, SkillPolicy& p);
void to_json(nlohmann::json& j, const EpisodeSummary& s);
void to_json(nlohmann::json& j, const TrainStats& s);

} // namespace terraverse
