#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace oracle {

namespace {

constexpr double eps = 1e-9;

int floor_idx(double x, double cs) { return static_cast<int>(std::floor(x / cs + eps)); }

double len_of(const Segment& seg, double d)
{
    switch (seg.kind) {
    case SegmentKind::stairs: return std::round(seg.param("steps").eval(d)) * seg.param("step_length").eval(d);
    case SegmentKind::poles: return std::round(seg.param("count").eval(d)) * seg.param("spacing").eval(d);
    default: return seg.param("length").eval(d);
    }
}

double opt(const Segment& seg, const char* name, double d, double fallback)
{
    const auto e = seg.maybe_param(name);
    return e ? e->eval(d) : fallback;
}

bool in_band(int i, double lo_m, double hi_m, double cs) { return floor_idx(lo_m, cs) <= i && i < floor_idx(hi_m, cs); }

} // namespace

double cell_height(const TerrainProgram& p, double d, const GridConfig& grid, int row, int col)
{
    const double cs = grid.cell_size;
    const double mid = grid.course_width / 2.0;
    double x0 = 0.0;
    for (const Segment& seg : p.segments) {
        const double len = len_of(seg, d);
        const double x1 = x0 + len;
        if (!in_band(row, x0, x1, cs)) {
            x0 = x1;
            continue;
        }
        const double width = opt(seg, "width", d, grid.course_width);
        const double off = opt(seg, "lateral_offset", d, 0.0);
        const double y_lo = mid + off - width / 2.0;
        const bool inside = in_band(col, y_lo, y_lo + width, cs);
        switch (seg.kind) {
        case SegmentKind::platform:
        case SegmentKind::box: return inside ? seg.param("height").eval(d) : 0.0;
        case SegmentKind::gap: return inside ? -seg.param("depth").eval(d) : 0.0;
        case SegmentKind::ramp: {
            if (!inside)
                return 0.0;
            const double h0 = seg.param("start_height").eval(d);
            const double h1 = seg.param("end_height").eval(d);
            const double t = len > 0.0 ? (row * cs - x0) / len : 0.0;
            const double across = width > 0.0 ? (col * cs - y_lo) / width : 0.0;
            return h0 + (h1 - h0) * t + opt(seg, "bank", d, 0.0) * across;
        }
        case SegmentKind::stairs: {
            if (!inside)
                return 0.0;
            const int steps = static_cast<int>(std::round(seg.param("steps").eval(d)));
            const double sl = seg.param("step_length").eval(d);
            int i = sl > 0.0 ? static_cast<int>(std::floor((row * cs - x0) / sl + eps)) : 0;
            i = std::max(0, std::min(i, steps - 1));
            return opt(seg, "base_height", d, 0.0) + (i + 1) * seg.param("step_height").eval(d);
        }
        case SegmentKind::beam: return inside ? seg.param("height").eval(d) : -1.0;
        case SegmentKind::poles: {
            const int count = static_cast<int>(std::round(seg.param("count").eval(d)));
            const double spacing = seg.param("spacing").eval(d);
            const double side = seg.param("pole_width").eval(d);
            for (int i = 0; i < count; ++i) {
                const double cx = x0 + (i + 0.5) * spacing;
                const double cy = mid + (i % 2 == 0 ? off : -off);
                if (in_band(row, cx - side / 2.0, cx + side / 2.0, cs)
                    && in_band(col, cy - side / 2.0, cy + side / 2.0, cs))
                    return 1.5;
            }
            return 0.0;
        }
        }
    }
    return 0.0;
}

CompiledTerrain compile_per_cell(const TerrainProgram& p, double d, const GridConfig& grid)
{
    const int rows = static_cast<int>(std::lround(grid.course_length / grid.cell_size));
    const int cols = static_cast<int>(std::lround(grid.course_width / grid.cell_size));
    CompiledTerrain t(rows, cols, grid.cell_size);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            t.at(r, c) = cell_height(p, d, grid, r, c);

    std::vector<double> starts;
    std::vector<double> lens;
    double x = 0.0;
    for (const auto& seg : p.segments) {
        starts.push_back(x);
        lens.push_back(len_of(seg, d));
        x += lens.back();
    }
    const double mid = grid.course_width / 2.0;
    if (p.goals.automatic) {
        // goal i sits on segment ceil(i*S/8); goals sharing a segment split it evenly
        const int S = static_cast<int>(p.segments.size());
        std::vector<int> seg_of;
        for (int i = 1; i <= 8; ++i)
            seg_of.push_back(static_cast<int>(std::ceil(static_cast<double>(i) * S / 8.0 - eps)) - 1);
        for (int i = 0; i < 8; ++i) {
            const int s = seg_of[i];
            const int m = static_cast<int>(std::count(seg_of.begin(), seg_of.end(), s));
            const int q = static_cast<int>(std::count(seg_of.begin(), seg_of.begin() + i, s));
            t.goals.push_back({starts[s] + lens[s] * (q + 1) / (m + 1), mid});
        }
    }
    else {
        for (const auto& g : p.goals.points)
            t.goals.push_back({g.x.eval(d), g.y.eval(d)});
    }
    t.spawn = {std::min(0.5, lens.front() / 2.0), mid};
    t.source_name = p.name;
    t.difficulty = d;
    return t;
}

namespace {

struct Rules {
    const CompiledTerrain& t;
    const SkillVector& s;

    double h(int r, int c) const { return t.at(r, c); }

    double grade(int r, int c) const
    {
        double g = 0.0;
        for (auto [ar, ac] : {std::pair{1, 0}, std::pair{0, 1}}) {
            const double before = t.in_grid(r - ar, c - ac) ? h(r, c) - h(r - ar, c - ac) : 0.0;
            const double after = t.in_grid(r + ar, c + ac) ? h(r + ar, c + ac) - h(r, c) : 0.0;
            const bool small = std::abs(before) <= 0.25 && std::abs(after) <= 0.25;
            const bool rising = before > eps && after > eps;
            const bool falling = before < -eps && after < -eps;
            if (small && (rising || falling))
                g = std::max(g, std::min(std::abs(before), std::abs(after)) / t.cell_size());
        }
        return g;
    }

    double strip(int r, int c) const
    {
        double best = std::numeric_limits<double>::infinity();
        for (auto [ar, ac] : {std::pair{1, 0}, std::pair{0, 1}}) {
            int run = 1;
            bool closed = true;
            for (int sign : {-1, 1}) {
                int k = 1;
                while (true) {
                    const int rr = r + sign * k * ar;
                    const int cc = c + sign * k * ac;
                    if (!t.in_grid(rr, cc)) {
                        closed = false;
                        break;
                    }
                    if (h(rr, cc) < h(r, c) - 0.25)
                        break;
                    ++k;
                }
                run += k - 1;
            }
            if (closed)
                best = std::min(best, run * t.cell_size());
        }
        return best;
    }

    bool standable(int r, int c) const { return grade(r, c) <= s.slope + eps && strip(r, c) + eps >= s.beam; }

    bool height_ok(int ur, int uc, int vr, int vc) const
    {
        const double dh = h(vr, vc) - h(ur, uc);
        return dh <= s.climb + eps && -dh <= s.descend + eps;
    }

    bool edge(int ur, int uc, int vr, int vc) const
    {
        const int dr = vr - ur;
        const int dc = vc - uc;
        if (dr != 0 && dc != 0)
            return false;
        const int dist = std::abs(dr) + std::abs(dc);
        if (dist == 0)
            return false;
        if (!height_ok(ur, uc, vr, vc) || !standable(vr, vc))
            return false;
        if (dist == 1)
            return true;
        // jump: every cell strictly between is pit, the landing is not
        const int sr = dr == 0 ? 0 : dr / std::abs(dr);
        const int sc = dc == 0 ? 0 : dc / std::abs(dc);
        const double pit_below = h(ur, uc) - 0.25;
        for (int k = 1; k < dist; ++k)
            if (!(h(ur + k * sr, uc + k * sc) < pit_below))
                return false;
        if (h(vr, vc) < pit_below)
            return false;
        return (dist - 1) * t.cell_size() <= s.jump + eps;
    }
};

} // namespace

std::vector<std::vector<int>> pairwise_graph(const CompiledTerrain& t, const SkillVector& s)
{
    const Rules rules{t, s};
    const int n = t.rows() * t.cols();
    std::vector<std::vector<int>> adj(n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (rules.edge(u / t.cols(), u % t.cols(), v / t.cols(), v % t.cols()))
                adj[u].push_back(v);
    return adj;
}

Stats naive_stats(const CompiledTerrain& t)
{
    Stats s{-std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0};
    double sum = 0.0;
    int n = 0;
    for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c < t.cols(); ++c) {
            s.max_height = std::max(s.max_height, t.at(r, c));
            sum += t.at(r, c);
            ++n;
            if (r + 1 < t.rows())
                s.max_diff = std::max(s.max_diff, std::abs(t.at(r, c) - t.at(r + 1, c)));
            if (c + 1 < t.cols())
                s.max_diff = std::max(s.max_diff, std::abs(t.at(r, c) - t.at(r, c + 1)));
        }
    const double mean = sum / n;
    double var = 0.0;
    for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c < t.cols(); ++c)
            var += (t.at(r, c) - mean) * (t.at(r, c) - mean);
    s.stddev = std::sqrt(var / n);
    for (std::size_t i = 1; i < t.goals.size(); ++i) {
        const int r0 = static_cast<int>(std::floor(t.goals[i - 1].x / t.cell_size() + eps));
        const int c0 = static_cast<int>(std::floor(t.goals[i - 1].y / t.cell_size() + eps));
        const int r1 = static_cast<int>(std::floor(t.goals[i].x / t.cell_size() + eps));
        const int c1 = static_cast<int>(std::floor(t.goals[i].y / t.cell_size() + eps));
        if (t.in_grid(r0, c0) && t.in_grid(r1, c1))
            s.max_goal_step = std::max(s.max_goal_step, std::abs(t.at(r0, c0) - t.at(r1, c1)));
    }
    return s;
}

int naive_edge_count(const std::vector<Cell>& path, const CompiledTerrain& t)
{
    int n = 0;
    for (const Cell& p : path) {
        int near = 0;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc)
                if (t.in_grid(p.row + dr, p.col + dc) && std::abs(t.at(p.row + dr, p.col + dc) - t.at(p.row, p.col)) > 0.25)
                    near = 1;
        n += near;
    }
    return n;
}

namespace {

double pick(Rng& rng, double lo, double hi)
{
    return std::round((lo + (hi - lo) * uniform01(rng)) * 100.0) / 100.0;
}

Expr lin(Rng& rng, double lo, double hi)
{
    const double a = pick(rng, lo, hi);
    const double b = pick(rng, lo, hi);
    return uniform01(rng) < 0.3 ? Expr::literal(a) : linear_expr(a, b - a);
}

Segment seg(SegmentKind k, std::initializer_list<std::pair<const char*, Expr>> fields)
{
    Segment s;
    s.kind = k;
    for (const auto& [name, e] : fields)
        s.params.emplace(name, e);
    return s;
}

} // namespace

TerrainProgram random_program(Rng& rng, double course_length)
{
    TerrainProgram p;
    p.name = "random_" + std::to_string(rng() % 100000);
    p.declares_param = true;
    p.segments.push_back(seg(SegmentKind::platform, {{"length", Expr::literal(pick(rng, 0.5, 2.0))},
                                                     {"height", lin(rng, -0.2, 0.4)}}));
    double budget = course_length - 2.0;
    const int extra = uniform_int(rng, 1, 5);
    for (int i = 0; i < extra; ++i) {
        const double room = budget / (extra - i);
        Segment s;
        switch (uniform_int(rng, 0, 6)) {
        case 0: s = seg(SegmentKind::platform, {{"length", lin(rng, 0.1, room)}, {"height", lin(rng, -0.5, 1.0)}}); break;
        case 1: s = seg(SegmentKind::box, {{"length", lin(rng, 0.05, room)}, {"height", lin(rng, 0.0, 2.0)}}); break;
        case 2: s = seg(SegmentKind::gap, {{"length", lin(rng, 0.05, room)}, {"depth", lin(rng, 0.1, 1.5)}}); break;
        case 3:
            s = seg(SegmentKind::ramp, {{"length", lin(rng, 0.3, room)},
                                        {"start_height", lin(rng, 0.0, 1.0)},
                                        {"end_height", lin(rng, 0.0, 1.0)}});
            if (uniform01(rng) < 0.3)
                s.params.emplace("bank", lin(rng, -0.5, 0.5));
            break;
        case 4: {
            const double steps = static_cast<double>(uniform_int(rng, 1, 5));
            s = seg(SegmentKind::stairs, {{"steps", Expr::literal(steps)},
                                          {"step_length", Expr::literal(pick(rng, 0.1, room / steps))},
                                          {"step_height", lin(rng, -0.3, 0.3)}});
            if (uniform01(rng) < 0.3)
                s.params.emplace("base_height", lin(rng, 0.0, 0.5));
            break;
        }
        case 5:
            s = seg(SegmentKind::beam, {{"length", lin(rng, 0.2, room)},
                                        {"height", lin(rng, 0.0, 0.5)},
                                        {"width", lin(rng, 0.05, 2.0)}});
            break;
        default: {
            const double count = static_cast<double>(uniform_int(rng, 1, 4));
            s = seg(SegmentKind::poles, {{"count", Expr::literal(count)},
                                         {"spacing", Expr::literal(pick(rng, 0.3, std::max(0.3, room / count)))},
                                         {"pole_width", lin(rng, 0.05, 0.4)}});
            break;
        }
        }
        if (s.kind != SegmentKind::beam && s.kind != SegmentKind::poles && uniform01(rng) < 0.3)
            s.params.emplace("width", lin(rng, 0.1, 4.0));
        if (uniform01(rng) < 0.3)
            s.params.emplace("lateral_offset", lin(rng, -1.5, 1.5));
        const double longest = std::max(len_of(s, 0.0), len_of(s, 1.0));
        if (longest > budget)
            continue;
        budget -= longest;
        p.segments.push_back(std::move(s));
    }
    if (uniform01(rng) < 0.3) {
        p.goals.automatic = false;
        for (int i = 0; i < 8; ++i)
            p.goals.points.push_back({lin(rng, 0.0, 20.0), lin(rng, -0.5, 4.5)});
    }
    return p;
}

SkillVector random_skill(Rng& rng)
{
    SkillVector s;
    for (std::size_t i = 0; i < SkillVector::size; ++i)
        s[i] = skill_floor[i] + (skill_ceiling[i] - skill_floor[i]) * uniform01(rng);
    return s;
}

SkillVector stronger_skill(const SkillVector& s, Rng& rng)
{
    SkillVector out = s;
    for (std::size_t i = 0; i < SkillVector::size; ++i)
        if (uniform01(rng) < 0.6)
            out[i] = s[i] + (skill_ceiling[i] - s[i]) * uniform01(rng);
    return out;
}

std::vector<std::filesystem::path> corpus_files()
{
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(TERRAVERSE_CORPUS_DIR))
        if (e.path().extension() == ".terrain")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace oracle
