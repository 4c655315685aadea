#include <terraverse/sim.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace terraverse {

namespace {

constexpr double tol = 1e-9;
constexpr int dr4[4] = {-1, 0, 0, 1};
constexpr int dc4[4] = {0, -1, 1, 0};

} // namespace

double SkillVector::operator[](std::size_t i) const
{
    switch (i) {
    case 0: return climb;
    case 1: return descend;
    case 2: return jump;
    case 3: return slope;
    default: return beam;
    }
}

double& SkillVector::operator[](std::size_t i)
{
    switch (i) {
    case 0: return climb;
    case 1: return descend;
    case 2: return jump;
    case 3: return slope;
    default: return beam;
    }
}

bool dominates(const SkillVector& a, const SkillVector& b)
{
    for (std::size_t i = 0; i < SkillVector::size; ++i)
        if (skill_direction[i] * (a[i] - b[i]) < 0.0)
            return false;
    return true;
}

SkillVector clamp_to_bounds(SkillVector s)
{
    for (std::size_t i = 0; i < SkillVector::size; ++i) {
        const double lo = std::min(skill_floor[i], skill_ceiling[i]);
        const double hi = std::max(skill_floor[i], skill_ceiling[i]);
        s[i] = std::clamp(s[i], lo, hi);
    }
    return s;
}

bool within_bounds(const SkillVector& s) { return clamp_to_bounds(s) == s; }

std::string_view termination_name(Termination t)
{
    switch (t) {
    case Termination::success: return "success";
    case Termination::stuck: return "stuck";
    case Termination::fall: return "fall";
    }
    return "?";
}

TerrainAnalysis::TerrainAnalysis(CompiledTerrain terrain) : terrain_(std::move(terrain))
{
    const CompiledTerrain& t = terrain_;
    const int rows = t.rows();
    const int cols = t.cols();
    const double cs = t.cell_size();
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    grade_.assign(n, 0.0);
    strip_width_.assign(n, std::numeric_limits<double>::infinity());
    near_edge_.assign(n, 0);
    jumps_.assign(n * 4, Jump{});

    // strips wider than the weakest beam skill never matter, so scans stop early
    const int scan_limit = static_cast<int>(std::ceil(skill_floor.beam / cs)) + 2;
    const int jump_limit = static_cast<int>(std::ceil(skill_ceiling.jump / cs)) + 1;

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int idx = index(r, c);
            const double h = t.at(r, c);

            // smooth gradient: both one-cell differences along an axis share a sign
            // and are small enough not to be step edges. The gentler one is the
            // slope; the other may include a ramp end landing mid-cell.
            double g = 0.0;
            for (int axis = 0; axis < 2; ++axis) {
                const int ar = axis == 0 ? 1 : 0;
                const int ac = axis == 0 ? 0 : 1;
                const double before = t.in_grid(r - ar, c - ac) ? h - t.at(r - ar, c - ac) : 0.0;
                const double after = t.in_grid(r + ar, c + ac) ? t.at(r + ar, c + ac) - h : 0.0;
                const bool smooth = std::abs(before) <= edge_threshold && std::abs(after) <= edge_threshold;
                if (smooth && ((before > tol && after > tol) || (before < -tol && after < -tol)))
                    g = std::max(g, std::min(std::abs(before), std::abs(after)) / cs);
            }
            grade_[idx] = g;

            // strip width along each axis, bounded by drops on both ends
            const double floor_h = h - edge_threshold;
            double narrow = std::numeric_limits<double>::infinity();
            for (int axis = 0; axis < 2; ++axis) {
                const int ar = axis == 0 ? 1 : 0;
                const int ac = axis == 0 ? 0 : 1;
                int run = 1;
                bool bounded = true;
                for (int sign : {-1, 1}) {
                    int k = 1;
                    for (;; ++k) {
                        const int rr = r + sign * k * ar;
                        const int cc = c + sign * k * ac;
                        if (!t.in_grid(rr, cc) || k > scan_limit) {
                            bounded = false;
                            break;
                        }
                        if (t.at(rr, cc) < floor_h)
                            break;
                    }
                    run += k - 1;
                }
                if (bounded)
                    narrow = std::min(narrow, run * cs);
            }
            strip_width_[idx] = narrow;

            for (int dr = -1; dr <= 1 && !near_edge_[idx]; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    if ((dr || dc) && t.in_grid(r + dr, c + dc) && std::abs(t.at(r + dr, c + dc) - h) > edge_threshold) {
                        near_edge_[idx] = 1;
                        break;
                    }

            for (int k = 0; k < 4; ++k) {
                int step = 1;
                while (step <= jump_limit + 1 && t.in_grid(r + step * dr4[k], c + step * dc4[k])
                       && t.at(r + step * dr4[k], c + step * dc4[k]) < h - pit_threshold)
                    ++step;
                const int pit = step - 1;
                const int lr = r + step * dr4[k];
                const int lc = c + step * dc4[k];
                if (pit >= 1 && pit <= jump_limit && t.in_grid(lr, lc))
                    jumps_[static_cast<std::size_t>(idx) * 4 + k] = {index(lr, lc), pit};
            }
        }
    }
}

bool TerrainAnalysis::enterable(int idx, const SkillVector& s) const
{
    return grade_[idx] <= s.slope + tol && strip_width_[idx] + tol >= s.beam;
}

void TerrainAnalysis::neighbors(int idx, const SkillVector& s, std::vector<int>& out) const
{
    out.clear();
    const int cols = terrain_.cols();
    const int r = idx / cols;
    const int c = idx % cols;
    const double h = terrain_.heights()[idx];
    const double cs = terrain_.cell_size();
    auto height_ok = [&](int v) {
        const double dh = terrain_.heights()[v] - h;
        return dh <= s.climb + tol && -dh <= s.descend + tol;
    };
    for (int k = 0; k < 4; ++k) {
        const int nr = r + dr4[k];
        const int nc = c + dc4[k];
        if (terrain_.in_grid(nr, nc)) {
            const int v = index(nr, nc);
            if (height_ok(v) && enterable(v, s))
                out.push_back(v);
        }
        const Jump& j = jumps_[static_cast<std::size_t>(idx) * 4 + k];
        if (j.landing >= 0 && j.pit_cells * cs <= s.jump + tol && height_ok(j.landing) && enterable(j.landing, s))
            out.push_back(j.landing);
    }
    // cell indices are row-major, so index order is (row, col) order
    std::sort(out.begin(), out.end());
}

Adjacency feasibility_graph(const CompiledTerrain& t, const SkillVector& s)
{
    TerrainAnalysis a(t);
    Adjacency adj(t.heights().size());
    for (int i = 0; i < static_cast<int>(adj.size()); ++i)
        a.neighbors(i, s, adj[i]);
    return adj;
}

namespace {

struct SearchBuffers {
    std::vector<int> stamp;
    std::vector<int> parent;
    std::vector<int> queue;
    std::vector<int> nbrs;
    int generation = 0;

    void prepare(std::size_t n)
    {
        if (stamp.size() != n) {
            stamp.assign(n, 0);
            parent.assign(n, -1);
            generation = 0;
        }
        if (++generation == std::numeric_limits<int>::max()) {
            std::fill(stamp.begin(), stamp.end(), 0);
            generation = 1;
        }
    }
};

/// Breadth-first search; appends the path (excluding `from`) to `path`.
bool shortest_path(const TerrainAnalysis& a, const SkillVector& s, int from, int to, SearchBuffers& buf,
                   std::vector<int>& path)
{
    if (from == to)
        return true;
    buf.prepare(a.terrain().heights().size());
    const int gen = buf.generation;
    buf.queue.clear();
    buf.queue.push_back(from);
    buf.stamp[from] = gen;
    buf.parent[from] = -1;
    for (std::size_t head = 0; head < buf.queue.size(); ++head) {
        const int u = buf.queue[head];
        a.neighbors(u, s, buf.nbrs);
        for (int v : buf.nbrs) {
            if (buf.stamp[v] == gen)
                continue;
            buf.stamp[v] = gen;
            buf.parent[v] = u;
            if (v == to) {
                const std::size_t start = path.size();
                for (int x = to; x != from; x = buf.parent[x])
                    path.push_back(x);
                std::reverse(path.begin() + static_cast<std::ptrdiff_t>(start), path.end());
                return true;
            }
            buf.queue.push_back(v);
        }
    }
    return false;
}

} // namespace

EpisodeResult rollout(const TerrainAnalysis& a, const SkillVector& s)
{
    thread_local SearchBuffers buf;
    const CompiledTerrain& t = a.terrain();
    EpisodeResult result;
    auto spawn = t.cell_of(t.spawn);
    if (!spawn)
        spawn = Cell{0, t.cols() / 2};
    int current = a.index(spawn->row, spawn->col);
    std::vector<int> path{current};

    for (const Point& g : t.goals) {
        const auto goal = t.cell_of(g);
        if (!goal) {
            result.terminated = Termination::stuck;
            break;
        }
        const int target = a.index(goal->row, goal->col);
        if (target != current && !a.enterable(target, s)) {
            result.terminated = Termination::fall;
            break;
        }
        if (!shortest_path(a, s, current, target, buf, path)) {
            result.terminated = Termination::stuck;
            break;
        }
        current = target;
        ++result.goals_reached;
    }
    if (result.goals_reached == static_cast<int>(t.goals.size()) && !t.goals.empty())
        result.terminated = Termination::success;

    const int cols = t.cols();
    result.path.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        result.path.push_back({path[i] / cols, path[i] % cols});
        if (a.near_edge(path[i]))
            ++result.edge_violations;
        if (i > 0)
            result.steps += std::abs(path[i] / cols - path[i - 1] / cols) + std::abs(path[i] % cols - path[i - 1] % cols);
    }
    return result;
}

EpisodeResult rollout(const CompiledTerrain& t, const SkillVector& s) { return rollout(TerrainAnalysis(t), s); }

int edge_violation_count(const std::vector<Cell>& path, const CompiledTerrain& t)
{
    int count = 0;
    for (const Cell& p : path) {
        bool near = false;
        for (int dr = -1; dr <= 1 && !near; ++dr)
            for (int dc = -1; dc <= 1 && !near; ++dc)
                if ((dr || dc) && t.in_grid(p.row + dr, p.col + dc)
                    && std::abs(t.at(p.row + dr, p.col + dc) - t.at(p.row, p.col)) > edge_threshold)
                    near = true;
        count += near ? 1 : 0;
    }
    return count;
}

void write_path_csv(const std::vector<Cell>& path, std::ostream& os)
{
    os << "row,col\n";
    for (const Cell& c : path)
        os << c.row << ',' << c.col << '\n';
}

void to_json(nlohmann::json& j, const SkillVector& s)
{
    j = {{"climb", s.climb}, {"descend", s.descend}, {"jump", s.jump}, {"slope", s.slope}, {"beam", s.beam}};
}

void from_json(const nlohmann::json& j, SkillVector& s)
{
    s.climb = j.at("climb").get<double>();
    s.descend = j.at("descend").get<double>();
    s.jump = j.at("jump").get<double>();
    s.slope = j.at("slope").get<double>();
    s.beam = j.at("beam").get<double>();
}

void to_json(nlohmann::json& j, const EpisodeResult& r)
{
    j = {{"goals_reached", r.goals_reached},
         {"steps", r.steps},
         {"edge_violations", r.edge_violations},
         {"terminated", termination_name(r.terminated)}};
}

} // namespace terraverse
