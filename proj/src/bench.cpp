#include <terraverse/bench.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace terraverse {

namespace {

double tidy(double v) { return std::round(v * 1e9) / 1e9; }

Expr lit(double v) { return Expr::literal(tidy(v)); }

/// Linear schedule from `at0` (level 1) to `at1` (level 10).
Expr sched(double at0, double at1) { return linear_expr(tidy(at0), tidy(at1 - at0)); }

const double* literal_value(const Expr& e)
{
    const auto* l = std::get_if<LiteralNode>(&e.node().value);
    return l ? &l->value : nullptr;
}

Expr plus(const Expr& a, const Expr& b)
{
    const double* x = literal_value(a);
    const double* y = literal_value(b);
    if (x && y)
        return lit(*x + *y);
    if (x && *x == 0.0)
        return b;
    if (y && *y == 0.0)
        return a;
    return Expr::binary(BinaryOp::add, a, b);
}

Expr times(double k, const Expr& e)
{
    if (const double* v = literal_value(e))
        return lit(k * *v);
    if (k == 1.0)
        return e;
    return Expr::binary(BinaryOp::mul, lit(k), e);
}

Expr times(const Expr& a, const Expr& b)
{
    if (const double* v = literal_value(a))
        return times(*v, b);
    if (const double* v = literal_value(b))
        return times(*v, a);
    return Expr::binary(BinaryOp::mul, a, b);
}

using Fields = std::initializer_list<std::pair<const char*, Expr>>;

Segment seg(SegmentKind kind, Fields fields)
{
    Segment s;
    s.kind = kind;
    for (const auto& [k, v] : fields)
        s.params.emplace(k, v);
    return s;
}

Segment platform(double length, Expr height = lit(0.0))
{
    return seg(SegmentKind::platform, {{"length", lit(length)}, {"height", height}});
}

struct Mark {
    double frac; // position along the segment
    double y = 2.0;
};

/// Lays segments end to end and pins goals to fractions of them, symbolically,
/// so goals follow difficulty-scaled lengths.
class Course {
public:
    Course& add(Segment s, std::initializer_list<Mark> marks = {})
    {
        Expr len;
        if (s.kind == SegmentKind::stairs)
            len = times(s.param("steps"), s.param("step_length"));
        else if (s.kind == SegmentKind::poles)
            len = times(s.param("count"), s.param("spacing"));
        else
            len = s.param("length");
        for (const Mark& m : marks)
            goals_.push_back({plus(cursor_, times(m.frac, len)), lit(m.y)});
        cursor_ = plus(cursor_, len);
        segments_.push_back(std::move(s));
        return *this;
    }

    /// Standard start: 2 m of flat ground holding the first two goals.
    Course& spawn(Expr height = lit(0.0)) { return add(platform(2.0, height), {{0.5}, {0.85}}); }

    TerrainProgram build(const std::string& name, const std::string& doc) const
    {
        if (goals_.size() != goal_count)
            throw std::logic_error("benchmark course " + name + " has " + std::to_string(goals_.size()) + " goals");
        TerrainProgram p;
        p.name = name;
        p.doc = doc;
        p.declares_param = true;
        p.segments = segments_;
        p.goals.automatic = false;
        p.goals.points = goals_;
        return p;
    }

private:
    std::vector<Segment> segments_;
    std::vector<GoalExpr> goals_;
    Expr cursor_ = lit(0.0);
};

BenchmarkFamily family(std::string name, std::string doc, const Course& c, std::string key_dim, Expr key,
                       double direction = 1.0)
{
    BenchmarkFamily f;
    f.program = c.build(name, doc);
    f.name = std::move(name);
    f.key_dimension = std::move(key_dim);
    f.key = std::move(key);
    f.key_direction = direction;
    return f;
}

std::vector<BenchmarkFamily> make_families()
{
    using K = SegmentKind;
    std::vector<BenchmarkFamily> out;

    {
        const Expr h = sched(0.1, 0.6);
        Course c;
        c.spawn().add(seg(K::box, {{"length", lit(1.0)}, {"height", h}}), {{0.5}});
        c.add(platform(3.0), {{0.15}, {0.35}, {0.55}, {0.75}, {0.9}});
        out.push_back(family("box_climb", "Climb onto a box and step down.", c, "box height (m)", h));
    }
    {
        const Expr grade = sched(0.1, 0.58);
        const Expr top = times(2.0, grade);
        Course c;
        c.spawn();
        c.add(seg(K::ramp, {{"length", lit(2.0)}, {"start_height", lit(0.0)}, {"end_height", top}}), {{0.5}});
        c.add(platform(1.0, top), {{0.5}});
        c.add(seg(K::ramp, {{"length", lit(2.0)}, {"start_height", top}, {"end_height", lit(0.0)}}), {{0.5}});
        c.add(platform(3.0), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("forward_ramp", "Walk up a ramp, across the top, and down.", c, "ramp grade", grade));
    }
    {
        const Expr grade = sched(0.1, 0.58);
        Course c;
        c.spawn();
        c.add(seg(K::ramp, {{"length", lit(4.0)}, {"start_height", lit(0.0)}, {"end_height", lit(0.0)},
                            {"bank", times(4.0, grade)}}),
              {{0.25, 0.35}, {0.5, 0.35}, {0.75, 0.35}});
        c.add(platform(2.5), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("sideways_ramp", "Cross a slope that rises to the side.", c, "cross grade", grade));
    }
    {
        const Expr grade = sched(0.2, 0.7);
        const Expr apex = times(1.2, grade);
        Course c;
        c.spawn();
        c.add(seg(K::ramp, {{"length", lit(1.2)}, {"start_height", lit(0.0)}, {"end_height", apex}}), {{0.5}, {0.95}});
        c.add(seg(K::ramp, {{"length", lit(1.2)}, {"start_height", apex}, {"end_height", lit(0.0)}}), {{0.5}});
        c.add(platform(3.0), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("a_frame", "Steep ramp up to a peak and straight back down.", c, "ramp grade", grade));
    }
    {
        const Expr gap = sched(0.2, 0.6);
        Course c;
        c.spawn();
        c.add(seg(K::gap, {{"length", gap}, {"depth", lit(0.6)}}));
        c.add(seg(K::box, {{"length", lit(1.5)}, {"height", lit(0.2)}}), {{0.3}, {0.7}});
        c.add(platform(3.0), {{0.2}, {0.4}, {0.6}, {0.8}});
        out.push_back(family("box_jump", "Jump across a gap onto a low box.", c, "gap length (m)", gap));
    }
    {
        const Expr gap = sched(0.15, 0.6);
        Course c;
        c.spawn();
        for (int i = 0; i < 3; ++i) {
            c.add(seg(K::gap, {{"length", gap}, {"depth", lit(0.8)}}));
            c.add(platform(0.5), {{0.5}});
        }
        c.add(platform(2.5), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("stepping_stones", "Hop across three stones separated by pits.", c, "gap length (m)", gap));
    }
    {
        const Expr step = sched(0.05, 0.25);
        Course c;
        c.spawn();
        c.add(seg(K::stairs, {{"steps", lit(6.0)}, {"step_length", lit(0.4)}, {"step_height", step}}),
              {{1.5 / 6.0}, {3.5 / 6.0}, {5.5 / 6.0}});
        c.add(platform(2.0, times(6.0, step)), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("staircase_up", "Climb a six-step staircase.", c, "step height (m)", step));
    }
    {
        const Expr step = sched(0.05, 0.3);
        const Expr top = times(3.0, step);
        Course c;
        c.spawn(top);
        c.add(platform(1.0, top), {{0.5}});
        c.add(seg(K::stairs, {{"steps", lit(3.0)}, {"step_length", lit(0.4)}, {"step_height", times(-1.0, step)},
                              {"base_height", top}}),
              {{0.5}});
        c.add(platform(3.0), {{0.2}, {0.4}, {0.6}, {0.8}});
        out.push_back(family("staircase_down", "Walk down three steps from a raised start.", c, "step height (m)", step));
    }
    {
        const Expr width = sched(0.9, 0.4);
        Course c;
        c.spawn();
        c.add(seg(K::beam, {{"length", lit(4.0)}, {"height", lit(0.0)}, {"width", width}}), {{0.25}, {0.5}, {0.75}});
        c.add(platform(2.5), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("narrow_passage", "Follow a long narrow walkway.", c, "walkway width (m)", width, -1.0));
    }
    {
        const Expr side = sched(0.2, 0.6);
        Course c;
        c.spawn();
        c.add(seg(K::poles, {{"count", lit(6.0)}, {"spacing", lit(1.0)}, {"pole_width", side}, {"lateral_offset", lit(0.4)}}),
              {{1.0 / 6.0}, {2.0 / 6.0}, {3.0 / 6.0}, {4.0 / 6.0}});
        c.add(platform(2.0), {{0.4}, {0.8}});
        out.push_back(family("agility_poles", "Weave between staggered poles.", c, "pole width (m)", side));
    }
    {
        const Expr width = sched(0.6, 0.2);
        Course c;
        c.spawn();
        c.add(seg(K::beam, {{"length", lit(3.0)}, {"height", lit(0.0)}, {"width", width}}), {{0.2}, {0.5}, {0.8}});
        c.add(platform(2.5), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("balance_beam", "Balance along a beam over a drop.", c, "beam width (m)", width, -1.0));
    }
    {
        const Expr gap = sched(0.2, 0.8);
        Course c;
        c.spawn();
        c.add(seg(K::gap, {{"length", gap}, {"depth", lit(0.8)}}));
        c.add(platform(3.0), {{0.1}, {0.25}, {0.4}, {0.55}, {0.7}, {0.85}});
        out.push_back(family("gap_cross", "Jump a single wide pit.", c, "gap length (m)", gap));
    }
    {
        const Expr h = sched(0.1, 0.5);
        Course c;
        c.spawn();
        for (int i = 0; i < 3; ++i) {
            c.add(seg(K::box, {{"length", lit(0.3)}, {"height", h}}));
            c.add(platform(1.2), {{0.5}, {0.9}});
        }
        out.push_back(family("hurdle", "Step over three thin hurdles.", c, "hurdle height (m)", h));
    }
    {
        const Expr h = sched(0.2, 0.75);
        Course c;
        c.spawn(h);
        c.add(platform(1.5, h), {{0.3}, {0.7}});
        c.add(platform(3.0), {{0.2}, {0.4}, {0.6}, {0.8}});
        out.push_back(family("platform_jump_down", "Drop off the end of the raised start.", c, "drop height (m)", h));
    }
    {
        const Expr h = sched(0.1, 0.7);
        Course c;
        c.spawn();
        c.add(seg(K::gap, {{"length", lit(0.2)}, {"depth", lit(0.6)}}));
        c.add(seg(K::box, {{"length", lit(3.5)}, {"height", h}}),
              {{1.0 / 7.0}, {2.0 / 7.0}, {3.0 / 7.0}, {4.0 / 7.0}, {5.0 / 7.0}, {6.0 / 7.0}});
        out.push_back(family("platform_jump_up", "Jump up onto a raised platform across a small gap.", c,
                             "platform height (m)", h));
    }
    {
        const Expr bank = sched(0.1, 0.5);
        Course c;
        c.spawn();
        c.add(seg(K::ramp, {{"length", lit(5.0)}, {"start_height", lit(0.0)}, {"end_height", lit(0.5)},
                            {"bank", times(4.0, bank)}}),
              {{0.2, 0.35}, {0.5, 0.35}, {0.8, 0.35}});
        c.add(platform(2.0, lit(0.5)), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("slope_traverse", "Climb a gentle ramp that is also tilted sideways.", c, "cross grade", bank));
    }
    {
        const Expr width = sched(1.2, 0.5);
        Course c;
        c.spawn();
        for (int i = 0; i < 3; ++i) {
            const double offset = i % 2 == 0 ? 0.8 : -0.8;
            c.add(seg(K::beam, {{"length", lit(1.5)}, {"height", lit(0.0)}, {"width", width}, {"lateral_offset", lit(offset)}}),
                  {{0.5, 2.0 + offset}});
            c.add(platform(i == 2 ? 1.5 : 0.6), {{0.5}});
        }
        out.push_back(family("zigzag_walls", "Zigzag along offset walkways joined by landings.", c, "walkway width (m)",
                             width, -1.0));
    }
    {
        const Expr top = sched(0.15, 0.6);
        Course c;
        c.spawn();
        c.add(seg(K::ramp, {{"length", lit(1.5)}, {"start_height", lit(0.0)}, {"end_height", top}}), {{0.5}});
        c.add(seg(K::box, {{"length", lit(0.8)}, {"height", sched(0.25, 0.95)}}), {{0.5}});
        c.add(seg(K::ramp, {{"length", lit(1.5)}, {"start_height", top}, {"end_height", lit(0.0)}}), {{0.5}});
        c.add(platform(3.0), {{0.3}, {0.6}, {0.9}});
        out.push_back(family("mixed_ramp_box", "Ramp up to a box, climb it, and ramp back down.", c, "ramp rise (m)", top));
    }
    {
        const Expr gap = sched(0.2, 0.7);
        Course c;
        c.spawn();
        c.add(seg(K::gap, {{"length", gap}, {"depth", lit(0.8)}}));
        c.add(platform(1.5), {{0.3}, {0.7}});
        c.add(seg(K::gap, {{"length", gap}, {"depth", lit(0.8)}}));
        c.add(platform(3.0), {{0.2}, {0.4}, {0.6}, {0.8}});
        out.push_back(family("double_gap", "Two pits in a row.", c, "gap length (m)", gap));
    }
    {
        const Expr width = sched(0.6, 0.25);
        Course c;
        c.spawn();
        for (int i = 0; i < 3; ++i) {
            c.add(seg(K::beam, {{"length", lit(1.2)}, {"height", lit(0.0)}, {"width", width}}), {{0.5}});
            c.add(platform(i == 2 ? 1.5 : 0.6), {{0.5}});
        }
        out.push_back(family("beam_sequence", "Three short beams with rests between them.", c, "beam width (m)", width, -1.0));
    }
    return out;
}

} // namespace

double BenchmarkFamily::key_at_level(int level) const { return key.eval(level_to_difficulty(level, ladder_levels)); }

BenchmarkSuite::BenchmarkSuite(std::vector<BenchmarkFamily> families, GridConfig grid) : families_(std::move(families))
{
    std::vector<TerrainProgram> programs;
    for (const auto& f : families_)
        programs.push_back(f.program);
    terrains_ = make_terrain_set(programs, grid, std::nullopt);
}

std::vector<TerrainProgram> BenchmarkSuite::programs() const
{
    std::vector<TerrainProgram> out;
    for (const auto& f : families_)
        out.push_back(f.program);
    return out;
}

BenchmarkSuite build_benchmark(const GridConfig& grid) { return BenchmarkSuite(make_families(), grid); }

const BenchmarkSuite& benchmark_suite()
{
    static const BenchmarkSuite suite = build_benchmark();
    return suite;
}

double goals_auc(std::span<const int> goals_by_level)
{
    if (goals_by_level.empty())
        return 0.0;
    if (goals_by_level.size() == 1)
        return goals_by_level[0] / static_cast<double>(goal_count);
    double area = 0.5 * (goals_by_level.front() + goals_by_level.back());
    for (std::size_t i = 1; i + 1 < goals_by_level.size(); ++i)
        area += goals_by_level[i];
    area /= static_cast<double>(goals_by_level.size() - 1);
    return area / goal_count;
}

std::vector<BenchmarkResult> evaluate_benchmark_batch(std::span<const SkillVector> skills, const BenchmarkSuite& suite)
{
    std::vector<BenchmarkResult> results(skills.size());
    const auto& fams = suite.families();
    for (std::size_t f = 0; f < fams.size(); ++f) {
        std::vector<std::vector<int>> curves(skills.size());
        for (int level = 1; level <= suite.levels(); ++level) {
            const auto analysis = suite.terrains()[f]->at_level(level);
            for (std::size_t p = 0; p < skills.size(); ++p) {
                const EpisodeResult r = rollout(*analysis, skills[p]);
                results[p].rows.push_back({fams[f].name, level, r.goals_reached, r.steps, r.edge_violations});
                curves[p].push_back(r.goals_reached);
            }
        }
        for (std::size_t p = 0; p < skills.size(); ++p) {
            double sum = 0.0;
            for (int g : curves[p])
                sum += g;
            results[p].family_auc[fams[f].name] = goals_auc(curves[p]);
            results[p].family_mean[fams[f].name] = sum / suite.levels();
        }
    }
    for (auto& r : results) {
        double sum = 0.0;
        for (const auto& row : r.rows)
            sum += row.goals;
        r.mean = r.rows.empty() ? 0.0 : sum / static_cast<double>(r.rows.size());
    }
    return results;
}

BenchmarkResult evaluate_benchmark(const SkillVector& skill, const BenchmarkSuite& suite)
{
    const SkillVector one[] = {skill};
    return evaluate_benchmark_batch(one, suite).front();
}

void write_benchmark_csv(const BenchmarkResult& r, std::ostream& os)
{
    os << "family,level,goals,steps,edge_violations\n";
    for (const auto& row : r.rows)
        os << row.family << ',' << row.level << ',' << row.goals << ',' << row.steps << ',' << row.edge_violations << '\n';
}

nlohmann::json benchmark_summary(const BenchmarkResult& r)
{
    nlohmann::json fams = nlohmann::json::object();
    for (const auto& [name, auc] : r.family_auc)
        fams[name] = {{"auc", auc}, {"mean_goals", r.family_mean.at(name)}};
    return {{"mean_goals", r.mean}, {"instances", r.rows.size()}, {"families", fams}};
}

} // namespace terraverse
