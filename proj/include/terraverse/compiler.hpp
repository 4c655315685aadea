#pragma once

#include <terraverse/dsl.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace terraverse {

/// Course geometry shared by every compiled terrain.
struct GridConfig {
    double course_length = 18.0; // meters along x (forward)
    double course_width = 4.0;   // meters along y
    double cell_size = 0.1;

    int rows() const;
    int cols() const;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline constexpr int goal_count = 8;
inline constexpr double beam_fall_depth = -1.0;
inline constexpr double pole_height = 1.5;

/// floor(x / cell_size) with a tolerance for representation error
/// (0.3 / 0.1 must map to 3, not 2).
int m_to_idx(double x, double cell_size);

class CompiledTerrain {
public:
    CompiledTerrain() = default;
    CompiledTerrain(int rows, int cols, double cell_size);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double cell_size() const { return cell_size_; }
    double length_m() const { return rows_ * cell_size_; }
    double width_m() const { return cols_ * cell_size_; }

    double at(int row, int col) const { return heights_[static_cast<std::size_t>(row) * cols_ + col]; }
    double& at(int row, int col) { return heights_[static_cast<std::size_t>(row) * cols_ + col]; }
    bool in_grid(int row, int col) const { return row >= 0 && row < rows_ && col >= 0 && col < cols_; }

    const std::vector<double>& heights() const { return heights_; }
    std::vector<double>& heights() { return heights_; }

    /// Grid cell containing a point, or nullopt when the point is outside the grid.
    std::optional<Cell> cell_of(Point p) const;
    bool point_in_bounds(Point p) const { return cell_of(p).has_value(); }

    std::vector<Point> goals;
    Point spawn;
    std::string source_name;
    double difficulty = 0.0;

    friend bool operator==(const CompiledTerrain&, const CompiledTerrain&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    double cell_size_ = 0.1;
    std::vector<double> heights_;
};

/// Footprint length of a segment at difficulty d (stairs and poles derive it).
double segment_length(const Segment& seg, double d);

CompiledTerrain compile(const TerrainProgram& program, double d, const GridConfig& grid = {});

struct TerrainStats {
    double max_height = 0.0;
    double max_consecutive_diff = 0.0;
    double height_std = 0.0;
    double max_goal_step = 0.0;
};

TerrainStats terrain_stats(const CompiledTerrain& t);

/// Row-major (one line per x-row), meters, 4 decimals.
void write_heights_csv(const CompiledTerrain& t, std::ostream& os);
/// P2 PGM, width = rows (x), height = cols (y); heights mapped affinely onto 0..65535.
void write_heights_pgm(const CompiledTerrain& t, std::ostream& os);
/// `idx,x_m,y_m`, one row per goal.
void write_goals_csv(const CompiledTerrain& t, std::ostream& os);

} // namespace terraverse
