#pragma once

#include <terraverse/trainer.hpp>

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace terraverse {

struct BenchmarkFamily {
    std::string name;
    TerrainProgram program;
    /// The field that scales with difficulty, and +1 if larger values are harder.
    std::string key_dimension;
    Expr key;
    double key_direction = 1.0;

    double key_at_level(int level) const;
};

/// Held-out evaluation courses: 20 families, each instantiated at 10 levels.
class BenchmarkSuite {
public:
    explicit BenchmarkSuite(std::vector<BenchmarkFamily> families, GridConfig grid = {});

    const std::vector<BenchmarkFamily>& families() const { return families_; }
    const TerrainSet& terrains() const { return terrains_; }
    int levels() const { return ladder_levels; }
    std::size_t size() const { return families_.size() * ladder_levels; }
    std::vector<TerrainProgram> programs() const;

private:
    std::vector<BenchmarkFamily> families_;
    TerrainSet terrains_; // one leveled terrain per family, never auto-fixed
};

const BenchmarkSuite& benchmark_suite();
BenchmarkSuite build_benchmark(const GridConfig& grid = {});

struct BenchmarkRow {
    std::string family;
    int level = 1;
    int goals = 0;
    int steps = 0;
    int edge_violations = 0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows; // family-major, levels ascending
    double mean = 0.0;              // mean goals over every instance
    std::map<std::string, double> family_auc;
    std::map<std::string, double> family_mean;
};

BenchmarkResult evaluate_benchmark(const SkillVector& skill, const BenchmarkSuite& suite = benchmark_suite());
/// Several policies at once; each instance is analyzed once.
std::vector<BenchmarkResult> evaluate_benchmark_batch(std::span<const SkillVector> skills,
                                                      const BenchmarkSuite& suite = benchmark_suite());

/// Normalized area under the goals-vs-difficulty curve (trapezoid over d in [0, 1], goals / 8).
double goals_auc(std::span<const int> goals_by_level);

void write_benchmark_csv(const BenchmarkResult& r, std::ostream& os);
nlohmann::json benchmark_summary(const BenchmarkResult& r);

} // namespace terraverse
