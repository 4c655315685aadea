#include <terraverse/error.hpp>
#include <terraverse/trainer.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace terraverse {

LeveledTerrain::LeveledTerrain(TerrainProgram program, GridConfig grid, std::optional<FixConfig> fix)
    : program_(std::move(program)), grid_(grid), fix_(fix)
{
}

std::shared_ptr<const TerrainAnalysis> LeveledTerrain::at_level(int level) const
{
    const int slot = std::clamp(level, 1, ladder_levels) - 1;
    std::lock_guard lock(mutex_);
    auto& entry = cache_[slot];
    if (!entry)
        entry = instantiate(slot + 1);
    return entry;
}

std::shared_ptr<const TerrainAnalysis> LeveledTerrain::build(int level) const
{
    const int slot = std::clamp(level, 1, ladder_levels) - 1;
    {
        std::lock_guard lock(mutex_);
        if (cache_[slot])
            return cache_[slot];
    }
    return instantiate(slot + 1);
}

std::shared_ptr<const TerrainAnalysis> LeveledTerrain::instantiate(int level) const
{
    CompiledTerrain t = compile(program_, level_to_difficulty(level, ladder_levels), grid_);
    if (fix_)
        t = auto_fix(t, *fix_).first;
    return std::make_shared<const TerrainAnalysis>(std::move(t));
}

TerrainSet make_terrain_set(std::span<const TerrainProgram> programs, const GridConfig& grid,
                            std::optional<FixConfig> fix)
{
    TerrainSet out;
    out.reserve(programs.size());
    for (const auto& p : programs)
        out.push_back(std::make_shared<const LeveledTerrain>(p, grid, fix));
    return out;
}

EpisodeSummary summarize_all_levels(const LeveledTerrain& terrain, const SkillVector& skill)
{
    EpisodeSummary s;
    for (int level = 1; level <= ladder_levels; ++level) {
        const EpisodeResult r = rollout(*terrain.at_level(level), skill);
        s.goals += r.goals_reached;
        s.steps += r.steps;
        s.edge_violations += r.edge_violations;
    }
    s.goals /= ladder_levels;
    s.steps /= ladder_levels;
    s.edge_violations /= ladder_levels;
    return s;
}

namespace {

constexpr double score_tol = 1e-12;

class LibraryScorer {
public:
    LibraryScorer(const TerrainSet& library, const std::vector<CurriculumState>& ladder, int& used)
        : library_(library), ladder_(ladder), used_(used)
    {
    }

    /// Mean goals over the library at the current ladder levels; fills per-terrain goals.
    double score(const SkillVector& s, std::vector<int>* per_terrain = nullptr)
    {
        double total = 0.0;
        if (per_terrain)
            per_terrain->clear();
        for (std::size_t j = 0; j < library_.size(); ++j) {
            const int goals = rollout(*library_[j]->at_level(ladder_[j].level), s).goals_reached;
            ++used_;
            total += goals;
            if (per_terrain)
                per_terrain->push_back(goals);
        }
        return total / static_cast<double>(library_.size());
    }

private:
    const TerrainSet& library_;
    const std::vector<CurriculumState>& ladder_;
    int& used_;
};

struct Candidate {
    SkillVector skill;
    double score;
    std::vector<int> goals;
    double distance;
    std::size_t index;
};

} // namespace

std::pair<SkillPolicy, TrainStats> train_agent(const SkillPolicy& policy, const TerrainSet& library,
                                               std::vector<CurriculumState>& ladder, Rng& rng,
                                               const TrainerConfig& cfg)
{
    if (library.empty())
        throw EmptyLibrary("training library is empty");
    if (ladder.size() != library.size())
        ladder.assign(library.size(), CurriculumState{});

    TrainStats stats;
    const SkillVector start = clamp_to_bounds(policy.mean);
    SkillVector lo, hi;
    for (std::size_t i = 0; i < SkillVector::size; ++i) {
        const double a = std::min(skill_floor[i], skill_ceiling[i]);
        const double b = std::max(skill_floor[i], skill_ceiling[i]);
        lo[i] = std::clamp(start[i] - policy.step_cap[i], a, b);
        hi[i] = std::clamp(start[i] + policy.step_cap[i], a, b);
    }
    auto clip = [&](SkillVector s) {
        for (std::size_t i = 0; i < SkillVector::size; ++i)
            s[i] = std::clamp(s[i], lo[i], hi[i]);
        return s;
    };

    for (const auto& terrain : library) {
        TerrainTrainStats ts;
        ts.terrain = terrain->program().name;
        ts.before = summarize_all_levels(*terrain, start);
        stats.per_terrain.push_back(std::move(ts));
    }

    int used = 0;
    LibraryScorer scorer(library, ladder, used);
    SkillVector incumbent = start;
    SkillVector spread = policy.spread;
    std::vector<int> incumbent_goals;
    double incumbent_score = scorer.score(incumbent, &incumbent_goals);

    const int k = std::max(2, cfg.candidates);
    const int j = static_cast<int>(library.size());
    const auto n_elite = static_cast<std::size_t>(std::max(1.0, std::ceil(k * cfg.elite_fraction)));
    std::normal_distribution<double> normal(0.0, 1.0);

    // worst case per generation: k candidates, the elite mean, one revert
    // trial per component, and the rescore after the ladder moves
    const int per_generation = (k + 1 + static_cast<int>(SkillVector::size) + 1) * j;
    for (int gen = 0; gen < cfg.generations; ++gen) {
        if (used + per_generation > cfg.budget)
            break;
        ++stats.generations_run;

        std::vector<Candidate> pop;
        pop.reserve(k);
        for (int c = 0; c < k; ++c) {
            SkillVector s;
            for (std::size_t i = 0; i < SkillVector::size; ++i)
                s[i] = incumbent[i] + spread[i] * normal(rng);
            s = clip(s);
            double dist = 0.0;
            for (std::size_t i = 0; i < SkillVector::size; ++i)
                dist += std::abs(s[i] - incumbent[i]);
            std::vector<int> goals;
            const double score = scorer.score(s, &goals);
            pop.push_back({s, score, std::move(goals), dist, static_cast<std::size_t>(c)});
        }
        // ties prefer the smallest change from the incumbent
        std::sort(pop.begin(), pop.end(), [](const Candidate& a, const Candidate& b) {
            if (a.score != b.score)
                return a.score > b.score;
            if (a.distance != b.distance)
                return a.distance < b.distance;
            return a.index < b.index;
        });
        const std::span<const Candidate> elites(pop.data(), n_elite);

        if (elites.front().score > incumbent_score + score_tol) {
            SkillVector avg{};
            for (std::size_t i = 0; i < SkillVector::size; ++i) {
                double sum = 0.0;
                for (const auto& e : elites)
                    sum += e.skill[i];
                avg[i] = sum / static_cast<double>(elites.size());
            }
            SkillVector next = clip(avg);
            std::vector<int> next_goals;
            double next_score = scorer.score(next, &next_goals);
            if (next_score < elites.front().score) {
                next = elites.front().skill;
                next_score = elites.front().score;
                next_goals = elites.front().goals;
            }
            // keep only the component changes the score depends on; reverting a
            // weakened component can never lower the score, so skills never regress
            for (std::size_t i = 0; i < SkillVector::size; ++i) {
                if (next[i] == incumbent[i])
                    continue;
                SkillVector trial = next;
                trial[i] = incumbent[i];
                std::vector<int> trial_goals;
                const double trial_score = scorer.score(trial, &trial_goals);
                if (trial_score >= next_score - score_tol) {
                    next = trial;
                    next_score = trial_score;
                    next_goals = std::move(trial_goals);
                }
            }
            for (std::size_t i = 0; i < SkillVector::size; ++i) {
                double var = 0.0;
                for (const auto& e : elites)
                    var += (e.skill[i] - avg[i]) * (e.skill[i] - avg[i]);
                spread[i] = std::max(cfg.min_spread, std::sqrt(var / static_cast<double>(elites.size())));
            }
            incumbent = next;
            incumbent_goals = std::move(next_goals);
        }
        else {
            for (std::size_t i = 0; i < SkillVector::size; ++i)
                spread[i] = std::clamp(spread[i] * 1.5, cfg.min_spread, std::max(cfg.min_spread, policy.step_cap[i]));
        }

        for (std::size_t t = 0; t < library.size(); ++t)
            ladder[t] = update(ladder[t], incumbent_goals[t], rng, cfg.ladder);
        incumbent_score = scorer.score(incumbent, &incumbent_goals);
    }

    SkillPolicy out = policy;
    out.mean = incumbent;
    out.spread = spread;
    stats.evaluations_used = used;

    for (std::size_t t = 0; t < library.size(); ++t) {
        auto& ts = stats.per_terrain[t];
        ts.after = summarize_all_levels(*library[t], incumbent);
        ts.final_level = ladder[t].level;
        stats.before.goals += ts.before.goals;
        stats.before.steps += ts.before.steps;
        stats.before.edge_violations += ts.before.edge_violations;
        stats.after.goals += ts.after.goals;
        stats.after.steps += ts.after.steps;
        stats.after.edge_violations += ts.after.edge_violations;
    }
    const double n = static_cast<double>(library.size());
    stats.before = {stats.before.goals / n, stats.before.steps / n, stats.before.edge_violations / n};
    stats.after = {stats.after.goals / n, stats.after.steps / n, stats.after.edge_violations / n};
    return {out, stats};
}

double evaluate_proxy(const SkillPolicy& policy, const TerrainSet& proxy)
{
    const SkillPolicy one[] = {policy};
    return evaluate_proxy_batch(one, proxy).front();
}

std::vector<double> evaluate_proxy_batch(std::span<const SkillPolicy> policies, const TerrainSet& proxy)
{
    std::vector<double> totals(policies.size(), 0.0);
    if (proxy.empty())
        return totals;
    for (const auto& terrain : proxy) {
        for (int level = 1; level <= ladder_levels; ++level) {
            const auto analysis = terrain->build(level);
            for (std::size_t p = 0; p < policies.size(); ++p)
                totals[p] += rollout(*analysis, policies[p].mean).goals_reached;
        }
    }
    const double n = static_cast<double>(proxy.size() * ladder_levels);
    for (double& v : totals)
        v /= n;
    return totals;
}

std::size_t soft_select(std::span<const double> scores, std::span<const double> weights, Rng& rng)
{
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t r = 0; r < order.size() && r < weights.size(); ++r) {
        acc += weights[r];
        if (u < acc)
            return order[r];
    }
    // rounding left u above the cumulative sum: fall back to the last positive weight
    for (std::size_t r = std::min(order.size(), weights.size()); r-- > 0;)
        if (weights[r] > 0.0)
            return order[r];
    return order.front();
}

std::vector<double> default_selection_weights(std::size_t n)
{
    std::vector<double> w(n, 0.0);
    if (n == 1) {
        w[0] = 1.0;
    }
    else if (n >= 2) {
        w[0] = 0.75;
        w[1] = 0.25;
    }
    return w;
}

void to_json(nlohmann::json& j, const SkillPolicy& p)
{
    j = {{"mean", p.mean}, {"spread", p.spread}, {"step_cap", p.step_cap}};
}

void from_json(const nlohmann::json& j, SkillPolicy& p)
{
    p.mean = j.at("mean").get<SkillVector>();
    if (j.contains("spread"))
        p.spread = j.at("spread").get<SkillVector>();
    if (j.contains("step_cap"))
        p.step_cap = j.at("step_cap").get<SkillVector>();
}

void to_json(nlohmann::json& j, const EpisodeSummary& s)
{
    j = {{"goals", s.goals}, {"steps", s.steps}, {"edge_violations", s.edge_violations}};
}

void to_json(nlohmann::json& j, const TrainStats& s)
{
    j = nlohmann::json::object();
    j["before"] = s.before;
    j["after"] = s.after;
    j["evaluations_used"] = s.evaluations_used;
    j["generations_run"] = s.generations_run;
    j["terrains"] = nlohmann::json::array();
    for (const auto& t : s.per_terrain)
        j["terrains"].push_back(
            {{"terrain", t.terrain}, {"before", t.before}, {"after", t.after}, {"final_level", t.final_level}});
}

} // namespace terraverse
