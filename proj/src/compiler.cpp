#include <terraverse/compiler.hpp>
#include <terraverse/error.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace terraverse {

namespace {

constexpr double index_eps = 1e-9;

struct Span {
    int lo = 0;
    int hi = 0; // exclusive
    bool contains(int i) const { return i >= lo && i < hi; }
};

Span cells_between(double lo_m, double hi_m, double cell_size, int n)
{
    Span s{m_to_idx(lo_m, cell_size), m_to_idx(hi_m, cell_size)};
    s.lo = std::clamp(s.lo, 0, n);
    s.hi = std::clamp(s.hi, 0, n);
    return s;
}

double require_nonneg(double v, const char* what, const Segment& seg)
{
    if (v < 0.0)
        throw CompileError(std::string(kind_name(seg.kind)) + " " + what + " is negative (" + std::to_string(v) + ")");
    return v;
}

int require_count(double v, const char* what, const Segment& seg)
{
    const double r = std::round(v);
    if (r < 1.0 || r > 1000.0)
        throw CompileError(std::string(kind_name(seg.kind)) + " " + what + " must round to a positive integer (got "
                           + std::to_string(v) + ")");
    return static_cast<int>(r);
}

} // namespace

int GridConfig::rows() const { return static_cast<int>(std::lround(course_length / cell_size)); }
int GridConfig::cols() const { return static_cast<int>(std::lround(course_width / cell_size)); }

int m_to_idx(double x, double cell_size) { return static_cast<int>(std::floor(x / cell_size + index_eps)); }

CompiledTerrain::CompiledTerrain(int rows, int cols, double cell_size)
    : rows_(rows), cols_(cols), cell_size_(cell_size), heights_(static_cast<std::size_t>(rows) * cols, 0.0)
{
}

std::optional<Cell> CompiledTerrain::cell_of(Point p) const
{
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0)
        return std::nullopt;
    Cell c{m_to_idx(p.x, cell_size_), m_to_idx(p.y, cell_size_)};
    if (!in_grid(c.row, c.col))
        return std::nullopt;
    return c;
}

double segment_length(const Segment& seg, double d)
{
    switch (seg.kind) {
    case SegmentKind::stairs:
        return require_count(seg.param("steps").eval(d), "steps", seg)
            * require_nonneg(seg.param("step_length").eval(d), "step_length", seg);
    case SegmentKind::poles:
        return require_count(seg.param("count").eval(d), "count", seg)
            * require_nonneg(seg.param("spacing").eval(d), "spacing", seg);
    default:
        return require_nonneg(seg.param("length").eval(d), "length", seg);
    }
}

CompiledTerrain compile(const TerrainProgram& program, double d, const GridConfig& grid)
{
    if (!(d >= 0.0 && d <= 1.0))
        throw EvalError("difficulty " + std::to_string(d) + " outside [0, 1]");
    CompiledTerrain t(grid.rows(), grid.cols(), grid.cell_size);
    t.source_name = program.name;
    t.difficulty = d;
    const double cs = grid.cell_size;
    const double centerline = grid.course_width / 2.0;

    std::vector<double> starts;
    std::vector<double> lengths;
    double cursor = 0.0;
    for (const auto& seg : program.segments) {
        const double len = segment_length(seg, d);
        starts.push_back(cursor);
        lengths.push_back(len);
        cursor += len;
    }
    if (cursor > grid.course_length + index_eps)
        throw CompileError("program '" + program.name + "' is " + std::to_string(cursor)
                           + " m long, course is " + std::to_string(grid.course_length) + " m");

    for (std::size_t s = 0; s < program.segments.size(); ++s) {
        const Segment& seg = program.segments[s];
        const double x0 = starts[s];
        const double len = lengths[s];
        const Span xs = cells_between(x0, x0 + len, cs, t.rows());
        if (xs.lo >= xs.hi)
            continue;

        const double offset = seg.maybe_param("lateral_offset") ? seg.param("lateral_offset").eval(d) : 0.0;
        double width = grid.course_width;
        if (auto w = seg.maybe_param("width"))
            width = require_nonneg(w->eval(d), "width", seg);
        const double y_lo = centerline + offset - width / 2.0;
        const Span ys = cells_between(y_lo, y_lo + width, cs, t.cols());

        switch (seg.kind) {
        case SegmentKind::platform:
        case SegmentKind::box: {
            const double h = seg.param("height").eval(d);
            for (int r = xs.lo; r < xs.hi; ++r)
                for (int c = ys.lo; c < ys.hi; ++c)
                    t.at(r, c) = h;
            break;
        }
        case SegmentKind::gap: {
            const double depth = require_nonneg(seg.param("depth").eval(d), "depth", seg);
            for (int r = xs.lo; r < xs.hi; ++r)
                for (int c = ys.lo; c < ys.hi; ++c)
                    t.at(r, c) = -depth;
            break;
        }
        case SegmentKind::ramp: {
            const double h0 = seg.param("start_height").eval(d);
            const double h1 = seg.param("end_height").eval(d);
            const double bank = seg.maybe_param("bank") ? seg.param("bank").eval(d) : 0.0;
            for (int r = xs.lo; r < xs.hi; ++r) {
                const double along = len > 0.0 ? (r * cs - x0) / len : 0.0;
                const double base = h0 + (h1 - h0) * along;
                for (int c = ys.lo; c < ys.hi; ++c) {
                    const double across = width > 0.0 ? (c * cs - y_lo) / width : 0.0;
                    t.at(r, c) = base + bank * across;
                }
            }
            break;
        }
        case SegmentKind::stairs: {
            const int steps = require_count(seg.param("steps").eval(d), "steps", seg);
            const double step_len = seg.param("step_length").eval(d);
            const double step_h = seg.param("step_height").eval(d);
            const double base = seg.maybe_param("base_height") ? seg.param("base_height").eval(d) : 0.0;
            for (int r = xs.lo; r < xs.hi; ++r) {
                int i = step_len > 0.0 ? static_cast<int>(std::floor((r * cs - x0) / step_len + index_eps)) : 0;
                i = std::clamp(i, 0, steps - 1);
                for (int c = ys.lo; c < ys.hi; ++c)
                    t.at(r, c) = base + (i + 1) * step_h;
            }
            break;
        }
        case SegmentKind::beam: {
            const double h = seg.param("height").eval(d);
            for (int r = xs.lo; r < xs.hi; ++r)
                for (int c = 0; c < t.cols(); ++c)
                    t.at(r, c) = ys.contains(c) ? h : beam_fall_depth;
            break;
        }
        case SegmentKind::poles: {
            const int count = require_count(seg.param("count").eval(d), "count", seg);
            const double spacing = seg.param("spacing").eval(d);
            const double side = require_nonneg(seg.param("pole_width").eval(d), "pole_width", seg);
            for (int i = 0; i < count; ++i) {
                const double cx = x0 + (i + 0.5) * spacing;
                const double cy = centerline + (i % 2 == 0 ? offset : -offset);
                const Span pr = cells_between(cx - side / 2.0, cx + side / 2.0, cs, t.rows());
                const Span pc = cells_between(cy - side / 2.0, cy + side / 2.0, cs, t.cols());
                for (int r = std::max(pr.lo, xs.lo); r < std::min(pr.hi, xs.hi); ++r)
                    for (int c = pc.lo; c < pc.hi; ++c)
                        t.at(r, c) = pole_height;
            }
            break;
        }
        }
    }

    if (program.goals.automatic) {
        const int n_seg = static_cast<int>(program.segments.size());
        std::vector<int> owner(goal_count);
        std::vector<int> per_segment(n_seg, 0);
        for (int i = 1; i <= goal_count; ++i) {
            owner[i - 1] = (i * n_seg + goal_count - 1) / goal_count - 1; // ceil(i*S/8), 0-based
            ++per_segment[owner[i - 1]];
        }
        std::vector<int> placed(n_seg, 0);
        for (int i = 0; i < goal_count; ++i) {
            const int s = owner[i];
            const int m = per_segment[s];
            const int q = placed[s]++;
            t.goals.push_back({starts[s] + lengths[s] * (q + 1) / (m + 1), centerline});
        }
    }
    else {
        for (const auto& g : program.goals.points)
            t.goals.push_back({g.x.eval(d), g.y.eval(d)});
    }
    t.spawn = {std::min(0.5, lengths.front() / 2.0), centerline};
    return t;
}

TerrainStats terrain_stats(const CompiledTerrain& t)
{
    TerrainStats s;
    const auto& h = t.heights();
    if (h.empty())
        return s;
    double max_h = h.front();
    double sum = 0.0;
    for (double v : h) {
        max_h = std::max(max_h, v);
        sum += v;
    }
    const double mean = sum / static_cast<double>(h.size());
    double sq = 0.0;
    for (double v : h)
        sq += (v - mean) * (v - mean);
    s.max_height = max_h;
    s.height_std = std::sqrt(sq / static_cast<double>(h.size()));

    double max_diff = 0.0;
    for (int r = 0; r < t.rows(); ++r) {
        for (int c = 0; c < t.cols(); ++c) {
            if (r + 1 < t.rows())
                max_diff = std::max(max_diff, std::abs(t.at(r + 1, c) - t.at(r, c)));
            if (c + 1 < t.cols())
                max_diff = std::max(max_diff, std::abs(t.at(r, c + 1) - t.at(r, c)));
        }
    }
    s.max_consecutive_diff = max_diff;

    for (std::size_t i = 1; i < t.goals.size(); ++i) {
        auto a = t.cell_of(t.goals[i - 1]);
        auto b = t.cell_of(t.goals[i]);
        if (a && b)
            s.max_goal_step = std::max(s.max_goal_step, std::abs(t.at(a->row, a->col) - t.at(b->row, b->col)));
    }
    return s;
}

void write_heights_csv(const CompiledTerrain& t, std::ostream& os)
{
    os << std::fixed << std::setprecision(4);
    for (int r = 0; r < t.rows(); ++r) {
        for (int c = 0; c < t.cols(); ++c) {
            if (c)
                os << ',';
            // avoid printing "-0.0000"
            const double v = std::abs(t.at(r, c)) < 0.00005 ? 0.0 : t.at(r, c);
            os << v;
        }
        os << '\n';
    }
}

void write_heights_pgm(const CompiledTerrain& t, std::ostream& os)
{
    const auto [lo_it, hi_it] = std::minmax_element(t.heights().begin(), t.heights().end());
    const double lo = t.heights().empty() ? 0.0 : *lo_it;
    const double hi = t.heights().empty() ? 0.0 : *hi_it;
    const double scale = hi > lo ? (hi - lo) / 65535.0 : 0.0;
    os << "P2\n";
    os << std::setprecision(17) << "# height_m = value * " << scale << " + " << lo << "\n";
    os << t.rows() << ' ' << t.cols() << "\n65535\n";
    for (int c = 0; c < t.cols(); ++c) {
        for (int r = 0; r < t.rows(); ++r) {
            if (r)
                os << ' ';
            os << (scale > 0.0 ? std::lround((t.at(r, c) - lo) / scale) : 0L);
        }
        os << '\n';
    }
}

void write_goals_csv(const CompiledTerrain& t, std::ostream& os)
{
    os << "idx,x_m,y_m\n" << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < t.goals.size(); ++i)
        os << i + 1 << ',' << t.goals[i].x << ',' << t.goals[i].y << '\n';
}

} // namespace terraverse
