#include <terraverse/error.hpp>
#include <terraverse/generation.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

namespace terraverse {

namespace {

struct Linear {
    double a = 0.0;
    double b = 0.0;
};

/// Recognizes `a + b * d` and `b * d` as produced by linear_expr.
std::optional<Linear> as_linear(const Expr& e)
{
    auto slope_term = [](const Expr& t) -> std::optional<double> {
        const auto* bin = std::get_if<BinaryNode>(&t.node().value);
        if (!bin || bin->op != BinaryOp::mul)
            return std::nullopt;
        const auto* lit = std::get_if<LiteralNode>(&bin->lhs.node().value);
        if (!lit || !std::holds_alternative<DifficultyNode>(bin->rhs.node().value))
            return std::nullopt;
        return lit->value;
    };
    if (auto b = slope_term(e))
        return Linear{0.0, *b};
    const auto* bin = std::get_if<BinaryNode>(&e.node().value);
    if (!bin || bin->op != BinaryOp::add)
        return std::nullopt;
    const auto* lit = std::get_if<LiteralNode>(&bin->lhs.node().value);
    const auto b = slope_term(bin->rhs);
    if (!lit || !b)
        return std::nullopt;
    return Linear{lit->value, *b};
}

Expr substitute(const Expr& e, const Expr& from, const Expr& to)
{
    if (e == from)
        return to;
    const auto& v = e.node().value;
    if (const auto* bin = std::get_if<BinaryNode>(&v))
        return Expr::binary(bin->op, substitute(bin->lhs, from, to), substitute(bin->rhs, from, to));
    if (const auto* call = std::get_if<CallNode>(&v)) {
        std::vector<Expr> args;
        for (const auto& a : call->args)
            args.push_back(substitute(a, from, to));
        return Expr::call(call->fn, std::move(args));
    }
    if (const auto* neg = std::get_if<NegateNode>(&v))
        return Expr::negate(substitute(neg->operand, from, to));
    return e;
}

/// Rounds to `digits` decimals so generated literals print short.
double round_to(double v, int digits)
{
    const double scale = std::pow(10.0, digits);
    return std::round(v * scale) / scale;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

enum class Unit { box, gap, ramp, stairs, beam };
constexpr std::array<Unit, 5> all_units{Unit::box, Unit::gap, Unit::ramp, Unit::stairs, Unit::beam};

std::string_view unit_name(Unit u)
{
    switch (u) {
    case Unit::box: return "box";
    case Unit::gap: return "gap";
    case Unit::ramp: return "ramp";
    case Unit::stairs: return "stairs";
    case Unit::beam: return "beam";
    }
    return "?";
}

/// The difficulty-scaled field of each obstacle and its admissible range.
struct HardParam {
    SegmentKind kind;
    std::string_view param;
    double direction; // +1: larger is harder
    double lo;
    double hi;
};

constexpr MockBounds bounds{};
constexpr std::array<HardParam, 5> hard_params{{
    {SegmentKind::box, "height", 1.0, 0.02, bounds.box_height_max},
    {SegmentKind::gap, "length", 1.0, 0.05, bounds.gap_length_max},
    {SegmentKind::ramp, "end_height", 1.0, 0.02, bounds.ramp_height_max},
    {SegmentKind::stairs, "step_height", 1.0, 0.02, bounds.step_height_max},
    {SegmentKind::beam, "width", -1.0, bounds.beam_width_min, bounds.beam_width_max},
}};

/// Values at d = 0 and d = 1 drawn for a fresh obstacle.
struct UnitRange {
    double v0_lo, v0_hi, v1_lo, v1_hi;
};

UnitRange initial_range(Unit u)
{
    switch (u) {
    case Unit::box: return {0.05, 0.10, 0.45, 0.70};
    case Unit::gap: return {0.10, 0.15, 0.55, 0.90};
    case Unit::ramp: return {0.05, 0.10, 0.55, 0.90};
    case Unit::stairs: return {0.03, 0.05, 0.20, 0.35};
    case Unit::beam: return {0.55, 0.65, 0.15, 0.25};
    }
    return {};
}

constexpr double spawn_length = 2.0;
constexpr double gap_depth = 0.5;
constexpr double stair_run = 0.3;

Segment make_segment(SegmentKind kind, std::initializer_list<std::pair<const char*, Expr>> params)
{
    Segment s;
    s.kind = kind;
    for (const auto& [k, v] : params)
        s.params.emplace(k, v);
    return s;
}

Expr lit(double v) { return Expr::literal(v); }

Segment landing(double length) { return make_segment(SegmentKind::platform, {{"length", lit(length)}, {"height", lit(0.0)}}); }

std::vector<Segment> make_unit(Unit u, Rng& rng)
{
    const UnitRange r = initial_range(u);
    const double v0 = round_to(uniform(rng, r.v0_lo, r.v0_hi), 2);
    const double v1 = round_to(uniform(rng, r.v1_lo, r.v1_hi), 2);
    const Expr hard = linear_expr(v0, round_to(v1 - v0, 2));
    const double land = round_to(uniform(rng, 1.0, 1.3), 1);
    std::vector<Segment> out;
    switch (u) {
    case Unit::box:
        out.push_back(make_segment(SegmentKind::box, {{"length", lit(round_to(uniform(rng, 0.6, 1.0), 1))}, {"height", hard}}));
        break;
    case Unit::gap:
        out.push_back(make_segment(SegmentKind::gap, {{"length", hard}, {"depth", lit(gap_depth)}}));
        break;
    case Unit::ramp: {
        const double len = round_to(uniform(rng, 1.2, 1.5), 1);
        out.push_back(make_segment(SegmentKind::ramp, {{"length", lit(len)}, {"start_height", lit(0.0)}, {"end_height", hard}}));
        out.push_back(make_segment(SegmentKind::ramp, {{"length", lit(len)}, {"start_height", hard}, {"end_height", lit(0.0)}}));
        break;
    }
    case Unit::stairs: {
        const double steps = uniform_int(rng, 3, 4);
        out.push_back(make_segment(SegmentKind::stairs,
                                   {{"steps", lit(steps)}, {"step_length", lit(stair_run)}, {"step_height", hard}}));
        // the descent mirrors the climb and ends level with the landing
        out.push_back(make_segment(SegmentKind::stairs, {{"steps", lit(steps)},
                                                         {"step_length", lit(stair_run)},
                                                         {"step_height", Expr::negate(hard)},
                                                         {"base_height", Expr::binary(BinaryOp::mul, lit(steps), hard)}}));
        break;
    }
    case Unit::beam: {
        Segment beam = make_segment(SegmentKind::beam, {{"length", lit(round_to(uniform(rng, 1.5, 2.0), 1))},
                                                        {"height", lit(0.0)},
                                                        {"width", hard}});
        // half a cell off center: the strip then snaps to even cell counts
        if (uniform01(rng) < 0.5)
            beam.params.emplace("lateral_offset", lit(0.05));
        out.push_back(std::move(beam));
        break;
    }
    }
    out.push_back(landing(land));
    return out;
}

/// Longest the course can get with every difficulty-scaled length at its bound.
double worst_case_length(const std::vector<Segment>& segments)
{
    double total = 0.0;
    for (const auto& seg : segments) {
        if (seg.kind == SegmentKind::gap && as_linear(seg.param("length"))) {
            total += bounds.gap_length_max;
            continue;
        }
        total += std::max(segment_length(seg, 0.0), segment_length(seg, 1.0));
    }
    return total;
}

bool fits(const std::vector<Segment>& segments, const GridConfig& grid)
{
    return worst_case_length(segments) <= grid.course_length - 0.5;
}

/// Goals spread over the flat platforms: goal i goes to platform ceil(i*P/8),
/// positions are symbolic so they follow difficulty-scaled lengths.
GoalSpec platform_goals(const std::vector<Segment>& segments, const GridConfig& grid)
{
    struct Station {
        double fixed;           // constant part of the start position
        std::vector<Expr> vars; // difficulty-dependent lengths before it
        double length;
    };
    std::vector<Station> stations;
    double fixed = 0.0;
    std::vector<Expr> vars;
    for (const auto& seg : segments) {
        Expr len;
        if (seg.kind == SegmentKind::stairs)
            len = Expr::binary(BinaryOp::mul, seg.param("steps"), seg.param("step_length"));
        else if (seg.kind == SegmentKind::poles)
            len = Expr::binary(BinaryOp::mul, seg.param("count"), seg.param("spacing"));
        else
            len = seg.param("length");
        const bool constant = segment_length(seg, 0.0) == segment_length(seg, 1.0) && !as_linear(len);
        if (seg.kind == SegmentKind::platform && constant)
            stations.push_back({fixed, vars, segment_length(seg, 0.0)});
        if (constant)
            fixed += segment_length(seg, 0.0);
        else
            vars.push_back(len);
    }
    GoalSpec spec;
    if (stations.empty())
        return spec; // automatic
    spec.automatic = false;
    const int n = static_cast<int>(stations.size());
    std::vector<int> per(n, 0), owner(goal_count);
    for (int i = 1; i <= goal_count; ++i) {
        owner[i - 1] = (i * n + goal_count - 1) / goal_count - 1;
        ++per[owner[i - 1]];
    }
    std::vector<int> placed(n, 0);
    for (int i = 0; i < goal_count; ++i) {
        const Station& s = stations[owner[i]];
        const int q = placed[owner[i]]++;
        Expr x = lit(round_to(s.fixed + s.length * (q + 1) / (per[owner[i]] + 1), 6));
        for (const auto& v : s.vars)
            x = Expr::binary(BinaryOp::add, x, v);
        spec.points.push_back({x, lit(grid.course_width / 2.0)});
    }
    return spec;
}

std::vector<std::string> unit_kinds(const std::vector<Segment>& segments)
{
    std::vector<std::string> kinds;
    for (const auto& seg : segments) {
        if (seg.kind == SegmentKind::platform)
            continue;
        std::string k(kind_name(seg.kind));
        if (kinds.empty() || kinds.back() != k)
            kinds.push_back(k);
    }
    return kinds;
}

std::string describe(const std::vector<Segment>& segments)
{
    const auto kinds = unit_kinds(segments);
    if (kinds.empty())
        return "Flat course.";
    std::string doc = "Obstacle course: ";
    for (std::size_t i = 0; i < kinds.size(); ++i)
        doc += (i ? ", " : "") + kinds[i];
    return doc + ".";
}

std::string random_name(Rng& rng, const char* prefix)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%08x", prefix, static_cast<unsigned>(rng() & 0xffffffffu));
    return buf;
}

TerrainProgram assemble(std::string name, std::vector<Segment> segments, const GridConfig& grid)
{
    TerrainProgram p;
    p.name = std::move(name);
    p.doc = describe(segments);
    p.declares_param = true;
    p.goals = platform_goals(segments, grid);
    p.segments = std::move(segments);
    return p;
}

TerrainProgram generate_from(std::vector<Unit> units, Rng& rng, const GridConfig& grid)
{
    const std::string name = random_name(rng, "course");
    std::vector<Segment> segments{landing(spawn_length)};
    for (Unit u : units) {
        auto unit = make_unit(u, rng);
        auto trial = segments;
        trial.insert(trial.end(), unit.begin(), unit.end());
        if (fits(trial, grid))
            segments = std::move(trial);
    }
    return assemble(name, std::move(segments), grid);
}

int unit_count(Rng& rng) { return uniform_int(rng, 2, 4); }

bool passes(const TerrainProgram& p, const GridConfig& grid)
{
    try {
        validate_program(p);
    }
    catch (const Error&) {
        return false;
    }
    return check_program(p, {}, {}, grid).passed;
}

} // namespace

TerrainProgram mock_generate(Rng& rng, const GridConfig& grid)
{
    for (;;) {
        // one obstacle kind per course, so a course exercises one skill
        const Unit u = all_units[uniform_int(rng, 0, static_cast<int>(all_units.size()) - 1)];
        const std::vector<Unit> units(static_cast<std::size_t>(unit_count(rng)), u);
        TerrainProgram p = generate_from(units, rng, grid);
        if (passes(p, grid))
            return p;
    }
}

TerrainProgram mock_generate_diverse(Rng& rng, const std::vector<std::string>& previous_docs, const GridConfig& grid)
{
    std::map<Unit, int> seen;
    for (Unit u : all_units) {
        seen[u] = 0;
        for (const auto& doc : previous_docs)
            if (doc.find(unit_name(u)) != std::string::npos)
                ++seen[u];
    }
    for (;;) {
        // least-covered kinds first, random order among equals
        std::vector<std::pair<double, Unit>> ranked;
        for (Unit u : all_units)
            ranked.emplace_back(seen[u] + uniform01(rng) * 0.5, u);
        std::sort(ranked.begin(), ranked.end());
        const std::vector<Unit> units(static_cast<std::size_t>(unit_count(rng)), ranked.front().second);
        TerrainProgram p = generate_from(units, rng, grid);
        if (passes(p, grid))
            return p;
    }
}

TerrainProgram random_generate(Rng& rng, const GridConfig& grid)
{
    for (;;) {
        TerrainProgram p;
        p.name = random_name(rng, "random");
        p.doc = "Randomly placed boxes and ramps.";
        p.segments.push_back(landing(spawn_length));
        const int k = uniform_int(rng, 3, 6);
        double cursor = spawn_length;
        for (int i = 0; i < k; ++i) {
            const double spacer = round_to(uniform(rng, 0.5, 1.5), 2);
            const double len = round_to(uniform(rng, 0.5 * robot_length, 2.0 * robot_length), 4);
            const double wid = round_to(uniform(rng, 0.5 * robot_width, 2.0 * robot_width), 4);
            const double hgt = round_to(uniform(rng, 0.5 * robot_height, 2.0 * robot_height), 4);
            const double off = round_to(uniform(rng, -0.5, 0.5), 2);
            if (cursor + spacer + len > grid.course_length - 0.2)
                break;
            cursor += spacer + len;
            p.segments.push_back(landing(spacer));
            Segment obstacle;
            if (uniform01(rng) < 0.5)
                obstacle = make_segment(SegmentKind::box, {{"length", lit(len)}, {"height", lit(hgt)}});
            else
                obstacle = make_segment(SegmentKind::ramp,
                                        {{"length", lit(len)}, {"start_height", lit(0.0)}, {"end_height", lit(hgt)}});
            obstacle.params.emplace("width", lit(wid));
            obstacle.params.emplace("lateral_offset", lit(off));
            p.segments.push_back(std::move(obstacle));
        }
        if (passes(p, grid))
            return p;
    }
}

MutationDirection mutation_direction(const std::optional<FeedbackBundle>& feedback)
{
    if (!feedback)
        return MutationDirection::harder;
    const LadderConfig ladder;
    if (feedback->train_after.goals >= ladder.g_promote)
        return MutationDirection::harder;
    if (feedback->train_after.goals < ladder.g_demote)
        return MutationDirection::easier;
    return MutationDirection::random;
}

namespace {

/// Scales one coefficient of one difficulty-scaled field by 1.2 or 0.8 and
/// rewrites every occurrence of that field's expression.
bool mutate_coefficient(TerrainProgram& p, bool harder, Rng& rng)
{
    struct Slot {
        Expr expr;
        const HardParam* hp;
        bool slope;
    };
    std::vector<Slot> slots;
    std::vector<Expr> seen;
    for (const auto& seg : p.segments) {
        for (const auto& hp : hard_params) {
            if (hp.kind != seg.kind)
                continue;
            const auto e = seg.maybe_param(hp.param);
            if (!e)
                continue;
            const auto lin = as_linear(*e);
            if (!lin || std::find(seen.begin(), seen.end(), *e) != seen.end())
                continue;
            seen.push_back(*e);
            if (lin->a != 0.0)
                slots.push_back({*e, &hp, false});
            if (lin->b != 0.0)
                slots.push_back({*e, &hp, true});
        }
    }
    if (slots.empty())
        return false;
    const Slot& slot = slots[uniform_int(rng, 0, static_cast<int>(slots.size()) - 1)];
    Linear lin = *as_linear(slot.expr);
    double& coef = slot.slope ? lin.b : lin.a;
    const bool raise_value = harder == (slot.hp->direction > 0);
    coef *= (raise_value == (coef > 0.0)) ? 1.2 : 0.8;

    const double v0 = round_to(std::clamp(lin.a, slot.hp->lo, slot.hp->hi), 4);
    const double v1 = round_to(std::clamp(lin.a + lin.b, slot.hp->lo, slot.hp->hi), 4);
    const Expr next = linear_expr(v0, round_to(v1 - v0, 4));
    if (next == slot.expr)
        return false;
    for (auto& seg : p.segments)
        for (auto& [name, e] : seg.params)
            e = substitute(e, slot.expr, next);
    for (auto& g : p.goals.points) {
        g.x = substitute(g.x, slot.expr, next);
        g.y = substitute(g.y, slot.expr, next);
    }
    return true;
}

/// Obstacle kind of the first non-platform segment, if the generator could have made it.
std::optional<Unit> course_unit(const TerrainProgram& p)
{
    for (const auto& seg : p.segments) {
        switch (seg.kind) {
        case SegmentKind::platform: continue;
        case SegmentKind::box: return Unit::box;
        case SegmentKind::gap: return Unit::gap;
        case SegmentKind::ramp: return Unit::ramp;
        case SegmentKind::stairs: return Unit::stairs;
        case SegmentKind::beam: return Unit::beam;
        case SegmentKind::poles: return std::nullopt;
        }
    }
    return std::nullopt;
}

/// Kind appearing in the fewest library docs, ties broken at random.
Unit least_covered(const std::vector<std::string>& docs, Rng& rng)
{
    std::vector<std::pair<double, Unit>> ranked;
    for (Unit u : all_units) {
        int n = 0;
        for (const auto& doc : docs)
            if (doc.find(unit_name(u)) != std::string::npos)
                ++n;
        ranked.emplace_back(n + uniform01(rng) * 0.5, u);
    }
    return std::min_element(ranked.begin(), ranked.end())->second;
}

/// Appends a fresh obstacle (harder) or drops the last one (easier). The new
/// obstacle fills the library's thinnest kind when the docs are known,
/// otherwise it repeats the course's own kind.
bool mutate_structure(TerrainProgram& p, bool harder, const std::vector<std::string>* docs, Rng& rng,
                      const GridConfig& grid)
{
    if (harder) {
        const Unit kind = docs && !docs->empty() ? least_covered(*docs, rng)
                                                 : course_unit(p).value_or(all_units[uniform_int(rng, 0, 4)]);
        auto unit = make_unit(kind, rng);
        auto trial = p.segments;
        trial.insert(trial.end(), unit.begin(), unit.end());
        if (!fits(trial, grid))
            return false;
        p.segments = std::move(trial);
    }
    else {
        std::vector<std::size_t> platforms;
        for (std::size_t i = 0; i < p.segments.size(); ++i)
            if (p.segments[i].kind == SegmentKind::platform)
                platforms.push_back(i);
        if (platforms.size() < 3)
            return false;
        p.segments.resize(platforms[platforms.size() - 2] + 1);
    }
    if (!p.goals.automatic)
        p.goals = platform_goals(p.segments, grid);
    p.doc = describe(p.segments);
    return true;
}

} // namespace

TerrainProgram mock_mutate(const TerrainProgram& parent, const std::optional<FeedbackBundle>& feedback, Rng& rng,
                           const GridConfig& grid)
{
    const MutationDirection dir = mutation_direction(feedback);
    for (int attempt = 0; attempt < 16; ++attempt) {
        const bool harder = dir == MutationDirection::harder
            || (dir == MutationDirection::random && uniform01(rng) < 0.5);
        TerrainProgram child = parent;
        bool changed = false;
        if (uniform01(rng) < 0.2)
            changed = mutate_structure(child, harder, feedback ? &feedback->library_docs : nullptr, rng, grid);
        if (!changed)
            changed = mutate_coefficient(child, harder, rng);
        if (changed && child != parent && passes(child, grid))
            return child;
    }
    return parent;
}

std::string MockGenerator::name() const { return mode_ == MockMode::random_baseline ? "mock-random" : "mock"; }

GenerationResult MockGenerator::generate(const GeneratorRequest& req, Rng& rng)
{
    GenerationResult out;
    TerrainProgram program;
    if (mode_ == MockMode::random_baseline) {
        program = random_generate(rng, grid_);
    }
    else if (req.kind == RequestKind::initial) {
        program = req.previous_docs.empty() ? mock_generate(rng, grid_) : mock_generate_diverse(rng, req.previous_docs, grid_);
    }
    else {
        std::optional<TerrainProgram> parent;
        try {
            parent = parse_program(req.parent_program.value_or(""));
        }
        catch (const Error&) {
        }
        program = parent ? mock_mutate(*parent, req.no_feedback ? std::nullopt : req.feedback, rng, grid_)
                         : mock_generate(rng, grid_);
    }
    out.text = format_program(program);
    out.transcript = {{"generator", name()}, {"messages", build_prompt(req)}, {"response", out.text}};
    return out;
}

} // namespace terraverse
