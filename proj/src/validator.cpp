#include <terraverse/error.hpp>
#include <terraverse/validator.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace terraverse {

bool ValidityReport::has(std::string_view code) const
{
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
}

bool FixLog::has(std::string_view code) const
{
    return std::any_of(applied.begin(), applied.end(), [&](const FixEntry& e) { return e.fix_code == code; });
}

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string at_d(double d) { return " (d=" + fmt(d) + ")"; }

} // namespace

ValidityReport check(const CompiledTerrain& t, const CheckLimits& limits)
{
    ValidityReport report;
    report.checked_difficulties.push_back(t.difficulty);
    auto add = [&](std::string code, std::string message, double measured, double threshold) {
        report.violations.push_back({std::move(code), std::move(message), measured, threshold});
    };

    const auto& h = t.heights();
    const auto nonfinite = std::count_if(h.begin(), h.end(), [](double v) { return !std::isfinite(v); });
    if (nonfinite > 0) {
        add("NONFINITE", std::to_string(nonfinite) + " non-finite height cells", static_cast<double>(nonfinite), 0.0);
    }
    else {
        const TerrainStats stats = terrain_stats(t);
        if (stats.max_height >= limits.max_height)
            add("MAX_HEIGHT", "maximum height " + fmt(stats.max_height) + " m is not below " + fmt(limits.max_height)
                    + " m",
                stats.max_height, limits.max_height);
        if (stats.max_goal_step >= limits.max_goal_step)
            add("GOAL_STEP", "height difference between consecutive goals " + fmt(stats.max_goal_step)
                    + " m is not below " + fmt(limits.max_goal_step) + " m",
                stats.max_goal_step, limits.max_goal_step);
    }
    if (t.goals.size() != static_cast<std::size_t>(goal_count))
        add("GOAL_COUNT", "expected 8 goals, found " + std::to_string(t.goals.size()),
            static_cast<double>(t.goals.size()), goal_count);
    for (std::size_t i = 0; i < t.goals.size(); ++i)
        if (!t.point_in_bounds(t.goals[i]))
            add("GOAL_OOB", "goal " + std::to_string(i + 1) + " at (" + fmt(t.goals[i].x) + ", " + fmt(t.goals[i].y)
                    + ") is outside the " + fmt(t.length_m()) + " x " + fmt(t.width_m()) + " m grid",
                static_cast<double>(i + 1), 0.0);
    report.passed = report.violations.empty();
    return report;
}

std::vector<double> default_difficulty_samples()
{
    std::vector<double> out;
    for (int k = 0; k < 10; ++k)
        out.push_back(k / 9.0);
    return out;
}

ValidityReport check_program(const TerrainProgram& program, const CheckLimits& limits,
                             std::span<const double> d_samples, const GridConfig& grid, const FixConfig* fix)
{
    std::vector<double> defaults;
    if (d_samples.empty()) {
        defaults = default_difficulty_samples();
        d_samples = defaults;
    }
    ValidityReport report;
    for (double d : d_samples) {
        report.checked_difficulties.push_back(d);
        CompiledTerrain t;
        try {
            t = compile(program, d, grid);
        }
        catch (const Error& e) {
            report.violations.push_back({"EXEC_FAIL", e.what() + at_d(d), d, 0.0});
            continue;
        }
        if (fix)
            t = auto_fix(t, *fix).first;
        for (auto v : check(t, limits).violations) {
            v.message += at_d(d);
            report.violations.push_back(std::move(v));
        }
    }
    report.passed = report.violations.empty();
    return report;
}

// ---------------------------------------------------------------------------
// Automatic fixing

namespace {

bool coord_in_range(double v, int cells, double cell_size)
{
    return std::isfinite(v) && v >= 0.0 && m_to_idx(v, cell_size) < cells;
}

double clamp_coord(double v, double extent, double cell_size)
{
    const double lo = cell_size;
    const double hi = extent - cell_size;
    if (std::isnan(v))
        return lo;
    return std::clamp(v, lo, hi);
}

int spawn_rows(const CompiledTerrain& t, double spawn_length)
{
    const int n = static_cast<int>(std::ceil(spawn_length / t.cell_size() - 1e-9));
    return std::clamp(n, 0, t.rows());
}

struct Component {
    std::vector<Cell> cells;
    Cell lo{};
    Cell hi{};
};

std::vector<Component> raised_components(const CompiledTerrain& t)
{
    std::vector<Component> out;
    std::vector<char> seen(t.heights().size(), 0);
    std::vector<Cell> stack;
    for (int r = 0; r < t.rows(); ++r) {
        for (int c = 0; c < t.cols(); ++c) {
            if (seen[r * t.cols() + c] || !(t.at(r, c) > 0.0))
                continue;
            Component comp;
            comp.lo = comp.hi = {r, c};
            stack.push_back({r, c});
            seen[r * t.cols() + c] = 1;
            while (!stack.empty()) {
                const Cell cur = stack.back();
                stack.pop_back();
                comp.cells.push_back(cur);
                comp.lo = {std::min(comp.lo.row, cur.row), std::min(comp.lo.col, cur.col)};
                comp.hi = {std::max(comp.hi.row, cur.row), std::max(comp.hi.col, cur.col)};
                constexpr int dr[4] = {-1, 1, 0, 0};
                constexpr int dc[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int nr = cur.row + dr[k];
                    const int nc = cur.col + dc[k];
                    if (!t.in_grid(nr, nc) || seen[nr * t.cols() + nc] || !(t.at(nr, nc) > 0.0))
                        continue;
                    seen[nr * t.cols() + nc] = 1;
                    stack.push_back({nr, nc});
                }
            }
            out.push_back(std::move(comp));
        }
    }
    return out;
}

/// Band of `width` indices around [lo, hi], shifted to fit in [min_idx, max_idx].
std::pair<int, int> widened_band(int lo, int hi, int width, int min_idx, int max_idx)
{
    const int extent = hi - lo + 1;
    int a = lo - (width - extent) / 2;
    int b = a + width - 1;
    if (a < min_idx) {
        b += min_idx - a;
        a = min_idx;
    }
    if (b > max_idx) {
        a -= b - max_idx;
        b = max_idx;
    }
    return {std::max(a, min_idx), std::min(b, max_idx)};
}

bool widen_pass(CompiledTerrain& t, int min_feature, int first_row, FixLog& log)
{
    bool changed = false;
    for (const Component& comp : raised_components(t)) {
        const int ext_x = comp.hi.row - comp.lo.row + 1;
        const int ext_y = comp.hi.col - comp.lo.col + 1;
        if (ext_x >= min_feature && ext_y >= min_feature)
            continue;
        std::vector<double> own;
        own.reserve(comp.cells.size());
        for (const Cell& c : comp.cells)
            own.push_back(t.at(c.row, c.col));
        bool touched = false;
        auto raise = [&](int r, int c, double h) {
            if (t.at(r, c) < h) {
                t.at(r, c) = h;
                touched = true;
            }
        };
        if (ext_x < min_feature) {
            const auto [a, b] = widened_band(comp.lo.row, comp.hi.row, min_feature, first_row, t.rows() - 1);
            for (std::size_t i = 0; i < comp.cells.size(); ++i)
                for (int r = a; r <= b; ++r)
                    raise(r, comp.cells[i].col, own[i]);
        }
        if (ext_y < min_feature) {
            const auto [a, b] = widened_band(comp.lo.col, comp.hi.col, min_feature, 0, t.cols() - 1);
            for (std::size_t i = 0; i < comp.cells.size(); ++i)
                for (int c = a; c <= b; ++c)
                    raise(comp.cells[i].row, c, own[i]);
        }
        if (touched) {
            changed = true;
            log.applied.push_back({"widen_obstacle", "raised region rows " + std::to_string(comp.lo.row) + ".."
                                                         + std::to_string(comp.hi.row) + ", cols "
                                                         + std::to_string(comp.lo.col) + ".."
                                                         + std::to_string(comp.hi.col) + " widened to "
                                                         + std::to_string(min_feature) + " cells"});
        }
    }
    return changed;
}

} // namespace

std::pair<CompiledTerrain, FixLog> auto_fix(const CompiledTerrain& input, const FixConfig& cfg)
{
    CompiledTerrain t = input;
    FixLog log;
    const double cs = t.cell_size();

    for (std::size_t i = 0; i < t.goals.size(); ++i) {
        Point& g = t.goals[i];
        const Point before = g;
        if (!coord_in_range(g.x, t.rows(), cs))
            g.x = clamp_coord(g.x, t.length_m(), cs);
        if (!coord_in_range(g.y, t.cols(), cs))
            g.y = clamp_coord(g.y, t.width_m(), cs);
        if (!(g == before) || (std::isnan(before.x) || std::isnan(before.y)))
            log.applied.push_back({"clamp_goal", "goal " + std::to_string(i + 1) + " (" + fmt(before.x) + ", "
                                                     + fmt(before.y) + ") -> (" + fmt(g.x) + ", " + fmt(g.y) + ")"});
    }

    const int flat_rows = spawn_rows(t, cfg.spawn_length);
    int flattened = 0;
    for (int r = 0; r < flat_rows; ++r)
        for (int c = 0; c < t.cols(); ++c)
            if (t.at(r, c) != 0.0) {
                t.at(r, c) = 0.0;
                ++flattened;
            }
    if (flattened > 0)
        log.applied.push_back({"flatten_spawn", std::to_string(flattened) + " cells with x < " + fmt(cfg.spawn_length)
                                                    + " m set to 0"});

    if (cfg.min_feature > 1) {
        // each pass only raises cells to heights already present, so this terminates
        for (int pass = 0; pass < 64; ++pass)
            if (!widen_pass(t, cfg.min_feature, flat_rows, log))
                break;
    }
    return {std::move(t), std::move(log)};
}

GridPatch diff_grids(const CompiledTerrain& before, const CompiledTerrain& after)
{
    GridPatch patch;
    for (int r = 0; r < after.rows(); ++r)
        for (int c = 0; c < after.cols(); ++c)
            if (!before.in_grid(r, c) || before.at(r, c) != after.at(r, c))
                patch.cells.push_back({r, c, after.at(r, c)});
    patch.goals = after.goals;
    return patch;
}

CompiledTerrain apply_patch(const CompiledTerrain& t, const GridPatch& patch)
{
    CompiledTerrain out = t;
    for (const auto& cv : patch.cells)
        if (out.in_grid(cv.row, cv.col))
            out.at(cv.row, cv.col) = cv.height;
    if (!patch.goals.empty())
        out.goals = patch.goals;
    return out;
}

void to_json(nlohmann::json& j, const Violation& v)
{
    j = {{"code", v.code}, {"message", v.message}, {"measured", v.measured}, {"threshold", v.threshold}};
}

void to_json(nlohmann::json& j, const ValidityReport& r)
{
    j = {{"passed", r.passed}, {"violations", r.violations}, {"checked_difficulties", r.checked_difficulties}};
}

void to_json(nlohmann::json& j, const FixLog& log)
{
    j = nlohmann::json::object();
    j["applied"] = nlohmann::json::array();
    for (const auto& e : log.applied)
        j["applied"].push_back({{"fix_code", e.fix_code}, {"detail", e.detail}});
}

void to_json(nlohmann::json& j, const GridPatch& patch)
{
    j = nlohmann::json::object();
    j["cells"] = nlohmann::json::array();
    for (const auto& c : patch.cells)
        j["cells"].push_back({c.row, c.col, c.height});
    j["goals"] = nlohmann::json::array();
    for (const auto& g : patch.goals)
        j["goals"].push_back({g.x, g.y});
}

void from_json(const nlohmann::json& j, GridPatch& patch)
{
    patch.cells.clear();
    patch.goals.clear();
    for (const auto& c : j.at("cells"))
        patch.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<double>()});
    for (const auto& g : j.at("goals"))
        patch.goals.push_back({g.at(0).get<double>(), g.at(1).get<double>()});
}

} // namespace terraverse
