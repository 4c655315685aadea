#pragma once

#include <terraverse/compiler.hpp>

#include <json.hpp>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace terraverse {

/// Feasibility thresholds. Both comparisons are strict "below":
/// a measured value equal to the limit fails.
struct CheckLimits {
    double max_height = 3.0;
    double max_goal_step = 0.8;
};

struct Violation {
    std::string code; // MAX_HEIGHT, GOAL_STEP, GOAL_OOB, GOAL_COUNT, NONFINITE, EXEC_FAIL
    std::string message;
    double measured = 0.0;
    double threshold = 0.0;
};

struct ValidityReport {
    bool passed = true;
    std::vector<Violation> violations;
    std::vector<double> checked_difficulties;

    bool has(std::string_view code) const;
};

ValidityReport check(const CompiledTerrain& t, const CheckLimits& limits = {});

struct FixConfig {
    double spawn_length = 1.5; // meters of flat ground at the start of the course
    int min_feature = 3;       // cells
};

struct FixEntry {
    std::string fix_code; // clamp_goal, flatten_spawn, widen_obstacle
    std::string detail;
};

struct FixLog {
    std::vector<FixEntry> applied;
    bool empty() const { return applied.empty(); }
    bool has(std::string_view code) const;
};

/// Goal clamping, spawn flattening, and widening of skinny raised
/// features, in that order. Idempotent; never raises the maximum height.
std::pair<CompiledTerrain, FixLog> auto_fix(const CompiledTerrain& t, const FixConfig& cfg = {});

/// Ladder difficulties {0, 1/9, ..., 1}.
std::vector<double> default_difficulty_samples();

/// Compiles the program at every sampled difficulty and aggregates check().
/// Compilation or evaluation failures become EXEC_FAIL violations. When `fix`
/// is given, each compiled grid is auto-fixed before checking (the admission
/// rule used by the generation pipeline).
ValidityReport check_program(const TerrainProgram& program, const CheckLimits& limits = {},
                             std::span<const double> d_samples = {}, const GridConfig& grid = {},
                             const FixConfig* fix = nullptr);

/// Grid-level difference between a compiled terrain and its fixed version.
struct GridPatch {
    struct CellValue {
        int row;
        int col;
        double height;
    };
    std::vector<CellValue> cells;
    std::vector<Point> goals;
};

GridPatch diff_grids(const CompiledTerrain& before, const CompiledTerrain& after);
CompiledTerrain apply_patch(const CompiledTerrain& t, const GridPatch& patch);

void to_json(nlohmann::json& j, const Violation& v);
void to_json(nlohmann::json& j, const ValidityReport& r);
void to_json(nlohmann::json& j, const FixLog& log);
void to_json(nlohmann::json& j, const GridPatch& patch);
void from_json(const nlohmann::json& j, GridPatch& patch);

} // namespace terraverse
