#pragma once

#include <terraverse/coevolution.hpp>

#include <chrono>
#include <filesystem>
#include <string>

namespace terraverse {

/// `seed<seed>-<UTC yyyymmddThhmmss>-<config hash>`
std::string make_run_id(const RunConfig& cfg, std::chrono::system_clock::time_point when);

/// On-disk artifact tree of one run:
///   <root>/<run_id>/config.json, stats.jsonl
///   iter_<t>/agent_<i>/{library/*.terrain, train_stats.jsonl, ladder.json, policy.json}
///   iter_<t>/{proxy_scores.json, selection.json, generation.json, status.json, transcripts/*.json}
///   final/{best_policy.json, benchmark.csv, benchmark_summary.json, curve.csv, curve.svg}
/// Nothing but the directory name depends on wall-clock time.
class RunStore {
public:
    RunStore(const std::filesystem::path& root, std::string run_id);

    const std::string& run_id() const { return run_id_; }
    const std::filesystem::path& dir() const { return dir_; }

    void write_config(const RunConfig& cfg) const;
    /// Also appends this iteration's agent records to stats.jsonl.
    void write_iteration(const IterationRecord& rec) const;
    void write_final(const RunArtifacts& run) const;

private:
    std::string run_id_;
    std::filesystem::path dir_;
};

/// Agent record line as stored in stats.jsonl.
nlohmann::json agent_stats_record(const IterationRecord& rec, const AgentRecord& a);

/// Loads final/best_policy.json from a run directory (or a policy JSON file). Throws ConfigError.
SkillPolicy load_policy(const std::filesystem::path& run_dir_or_file);

void write_curve_csv(const std::vector<double>& curve, std::ostream& os);

} // namespace terraverse
