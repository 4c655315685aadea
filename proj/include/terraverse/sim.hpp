#pragma once

#include <terraverse/compiler.hpp>

#include <json.hpp>

#include <array>
#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

namespace terraverse {

/// Capabilities of the traversal agent. Larger is better for every
/// component except `beam`, the narrowest strip the agent can stand on.
struct SkillVector {
    double climb = 0.0;   // max upward step (m)
    double descend = 0.0; // max safe drop (m)
    double jump = 0.0;    // max pit length cleared (m)
    double slope = 0.0;   // max traversable gradient (rise/run)
    double beam = 0.6;    // min walkable strip width (m)

    static constexpr std::size_t size = 5;
    double operator[](std::size_t i) const;
    double& operator[](std::size_t i);

    friend bool operator==(const SkillVector&, const SkillVector&) = default;
};

inline constexpr SkillVector skill_floor{0.0, 0.0, 0.0, 0.0, 0.6};
inline constexpr SkillVector skill_ceiling{1.0, 1.2, 1.0, 0.8, 0.0};

/// +1 where a larger value is a stronger skill, -1 for beam.
inline constexpr std::array<double, 5> skill_direction{1.0, 1.0, 1.0, 1.0, -1.0};

/// True when `a` is at least as capable as `b` in every component.
bool dominates(const SkillVector& a, const SkillVector& b);
SkillVector clamp_to_bounds(SkillVector s);
bool within_bounds(const SkillVector& s);

inline constexpr double edge_threshold = 0.25; // |dh| that counts as an edge
inline constexpr double pit_threshold = 0.25;  // cells this far below take-off form a pit

enum class Termination { success, stuck, fall };

struct EpisodeResult {
    int goals_reached = 0;
    int steps = 0;
    int edge_violations = 0;
    Termination terminated = Termination::stuck;
    std::vector<Cell> path;
};

std::string_view termination_name(Termination t);

/// Skill-independent per-cell features of a compiled terrain. Built once per
/// terrain and shared read-only between rollouts.
class TerrainAnalysis {
public:
    explicit TerrainAnalysis(CompiledTerrain terrain);

    const CompiledTerrain& terrain() const { return terrain_; }
    int index(int row, int col) const { return row * terrain_.cols() + col; }

    /// Gradient of the smooth (ramp-like) part of the neighborhood, 0 on flat or stepped ground.
    double grade(int idx) const { return grade_[idx]; }
    /// Narrowest strip width (m) bounded by drops on both sides along an axis; +inf if none.
    double strip_width(int idx) const { return strip_width_[idx]; }
    bool near_edge(int idx) const { return near_edge_[idx] != 0; }

    struct Jump {
        int landing = -1; // cell index, -1 if none
        int pit_cells = 0;
    };
    /// Jump over a pit from `idx` in direction k (0:-row, 1:-col, 2:+col, 3:+row).
    const Jump& jump(int idx, int k) const { return jumps_[static_cast<std::size_t>(idx) * 4 + k]; }

    bool enterable(int idx, const SkillVector& s) const;

    /// Out-neighbors of `idx` under skill `s`, sorted by (row, col).
    void neighbors(int idx, const SkillVector& s, std::vector<int>& out) const;

private:
    CompiledTerrain terrain_;
    std::vector<double> grade_;
    std::vector<double> strip_width_;
    std::vector<char> near_edge_;
    std::vector<Jump> jumps_;
};

using Adjacency = std::vector<std::vector<int>>;

/// Directed move graph over cell indices (row * cols + col).
Adjacency feasibility_graph(const CompiledTerrain& t, const SkillVector& s);

EpisodeResult rollout(const TerrainAnalysis& a, const SkillVector& s);
EpisodeResult rollout(const CompiledTerrain& t, const SkillVector& s);

/// Path cells having any 8-neighbor with |dh| > edge_threshold.
int edge_violation_count(const std::vector<Cell>& path, const CompiledTerrain& t);

void write_path_csv(const std::vector<Cell>& path, std::ostream& os);

void to_json(nlohmann::json& j, const SkillVector& s);
void from_json(const nlohmann::json& j, SkillVector& s);
void to_json(nlohmann::json& j, const EpisodeResult& r);

} // namespace terraverse
