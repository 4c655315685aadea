#pragma once

#include <terraverse/bench.hpp>
#include <terraverse/generation.hpp>
#include <terraverse/trainer.hpp>

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace terraverse {

enum class GeneratorKind { mock, remote };

enum class Ablation { none, no_feedback, initial_only, final_only, diversity_only, random_baseline, oracle };

std::string_view ablation_name(Ablation a);
std::optional<Ablation> ablation_from_name(std::string_view name);
std::string_view generator_name(GeneratorKind g);
std::optional<GeneratorKind> generator_from_name(std::string_view name);

struct RunConfig {
    int iterations = 5;   // T
    int agents = 8;       // N
    int library_size = 10; // J
    std::uint64_t seed = 0;
    GeneratorKind generator = GeneratorKind::mock;
    RemoteConfig remote;
    Ablation ablation = Ablation::none;
    bool resampling_enabled = false;
    TrainerConfig trainer;
    SkillPolicy initial_policy;
    PipelineConfig pipeline;
    std::vector<double> selection_weights; // empty: 0.75, 0.25, 0, ...
    std::string incontext_program;         // empty: built-in example
    int threads = 0;                       // 0: hardware concurrency

    /// Throws ConfigError on T, N, J < 1, bad weights, or a bad ladder.
    void validate() const;
    std::vector<double> weights() const;
    const std::string& incontext() const;
};

struct AgentRecord {
    int agent = 0;
    int initialized_from = -1; // previous-iteration agent whose policy seeded this one
    std::vector<TerrainProgram> library;
    std::vector<CurriculumState> ladder_start;
    std::vector<CurriculumState> ladder;
    SkillPolicy policy_before;
    SkillPolicy policy_after;
    TrainStats stats;
};

struct IterationRecord {
    int iteration = 1;
    bool partial = false;
    std::string failure;
    std::vector<AgentRecord> agents;
    std::size_t proxy_size = 0;
    std::vector<double> proxy_scores;
    int best_agent = 0;
    std::vector<int> selection; // next-iteration agent -> agent index in this iteration
    double benchmark_mean = 0.0; // best agent on the held-out suite
    GenerationStats generation;  // requests that produced this iteration's libraries
    std::vector<nlohmann::json> transcripts;
};

struct RunArtifacts {
    RunConfig config;
    std::vector<IterationRecord> iterations;
    SkillPolicy best_policy;
    BenchmarkResult benchmark;

    /// Benchmark mean of the best policy after each iteration.
    std::vector<double> curve() const;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// The outer loop: generate, train N agents, rank them on the union of all
/// libraries so far, seed the next population by soft selection, and evolve
/// the best agent's library N times. `on_iteration` sees each finished (or
/// aborted) iteration. Passing `generator` overrides cfg.generator.
RunArtifacts run_coevolution(const RunConfig& cfg, const IterationCallback& on_iteration = {},
                             EnvironmentGenerator* generator = nullptr);

struct LearningProgress {
    TerrainProgram program;
    double goals_before = 0.0;
    double goals_after = 0.0;
};

/// Indices into `history`, drawn with replacement with probability
/// proportional to max(epsilon, goals_after - goals_before).
std::vector<std::size_t> resample_by_learning_progress(std::span<const LearningProgress> history, std::size_t count,
                                                       Rng& rng, double epsilon = 0.01);

void to_json(nlohmann::json& j, const RunConfig& cfg);
void from_json(const nlohmann::json& j, RunConfig& cfg);

} // namespace terraverse
