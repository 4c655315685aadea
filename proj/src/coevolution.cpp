#include <terraverse/coevolution.hpp>
#include <terraverse/error.hpp>
#include <terraverse/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <unordered_set>

namespace terraverse {

namespace {

constexpr std::pair<Ablation, std::string_view> ablation_names[] = {
    {Ablation::none, "none"},
    {Ablation::no_feedback, "no_feedback"},
    {Ablation::initial_only, "initial_only"},
    {Ablation::final_only, "final_only"},
    {Ablation::diversity_only, "diversity_only"},
    {Ablation::random_baseline, "random_baseline"},
    {Ablation::oracle, "oracle"},
};

// rng stream ids, one family per kind of draw
constexpr std::uint64_t stream_initial = 0x1000;
constexpr std::uint64_t stream_split = 0x2000;
constexpr std::uint64_t stream_train = 0x3000;
constexpr std::uint64_t stream_select = 0x4000;
constexpr std::uint64_t stream_evolve = 0x5000;
constexpr std::uint64_t stream_resample = 0x6000;
constexpr std::uint64_t stream_subset = 0x7000;

std::unique_ptr<EnvironmentGenerator> make_generator(const RunConfig& cfg)
{
    if (cfg.generator == GeneratorKind::remote)
        return std::make_unique<RemoteGenerator>(cfg.remote);
    const MockMode mode = cfg.ablation == Ablation::random_baseline ? MockMode::random_baseline : MockMode::standard;
    return std::make_unique<MockGenerator>(mode, cfg.pipeline.grid);
}

std::size_t worker_count(const RunConfig& cfg)
{
    return cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : default_threads();
}

/// Θ_proxy: every admitted program so far, deduplicated by canonical text.
class ProxySet {
public:
    ProxySet(GridConfig grid, std::optional<FixConfig> fix) : grid_(grid), fix_(std::move(fix)) {}

    void add(const TerrainProgram& p)
    {
        if (seen_.insert(format_program(p)).second)
            terrains_.push_back(std::make_shared<LeveledTerrain>(p, grid_, fix_));
    }
    const TerrainSet& terrains() const { return terrains_; }

private:
    GridConfig grid_;
    std::optional<FixConfig> fix_;
    std::unordered_set<std::string> seen_;
    TerrainSet terrains_;
};

std::size_t best_index(const std::vector<double>& scores)
{
    // first maximum, so ties go to the lower agent index
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

struct TrainJob {
    SkillPolicy policy;
    std::vector<TerrainProgram> library;
    std::vector<CurriculumState> ladder;
    int initialized_from = -1;
};

/// Trains every job concurrently; a failing agent aborts the iteration after
/// the partial record has been reported.
std::vector<AgentRecord> train_population(const RunConfig& cfg, std::vector<TrainJob>& jobs, int t,
                                          const std::optional<FixConfig>& fix, IterationRecord& rec,
                                          const IterationCallback& on_iteration)
{
    const std::uint64_t train_seed = derive_seed(cfg.seed, stream_train + static_cast<std::uint64_t>(t));
    std::vector<AgentRecord> agents(jobs.size());
    std::vector<std::string> failures(jobs.size());
    parallel_for(jobs.size(), worker_count(cfg), [&](std::size_t k) {
        AgentRecord& a = agents[k];
        a.agent = static_cast<int>(k);
        a.initialized_from = jobs[k].initialized_from;
        a.library = jobs[k].library;
        a.ladder_start = jobs[k].ladder;
        a.policy_before = jobs[k].policy;
        try {
            Rng rng(derive_seed(train_seed, k));
            const TerrainSet lib = make_terrain_set(a.library, cfg.pipeline.grid, fix);
            a.ladder = a.ladder_start;
            auto [policy, stats] = train_agent(a.policy_before, lib, a.ladder, rng, cfg.trainer);
            a.policy_after = policy;
            a.stats = std::move(stats);
        }
        catch (const std::exception& e) {
            failures[k] = "agent " + std::to_string(k) + ": " + e.what();
        }
    });
    for (const auto& f : failures) {
        if (f.empty())
            continue;
        rec.partial = true;
        rec.failure = f;
        rec.agents = std::move(agents);
        if (on_iteration)
            on_iteration(rec);
        throw TrainingError(f);
    }
    return agents;
}

void finish_scoring(IterationRecord& rec, ProxySet& proxy)
{
    for (const auto& a : rec.agents)
        for (const auto& p : a.library)
            proxy.add(p);
    std::vector<SkillPolicy> policies;
    for (const auto& a : rec.agents)
        policies.push_back(a.policy_after);
    rec.proxy_size = proxy.terrains().size();
    rec.proxy_scores = evaluate_proxy_batch(policies, proxy.terrains());
    rec.best_agent = static_cast<int>(best_index(rec.proxy_scores));
}

void collect_transcripts(IterationRecord& rec, std::vector<AdmittedProgram>& admitted)
{
    for (auto& a : admitted)
        rec.transcripts.push_back(std::move(a.transcript));
}

FeedbackBundle feedback_for(const AgentRecord& best, std::size_t j, const RunConfig& cfg,
                            const std::optional<FixConfig>& fix)
{
    FeedbackBundle fb;
    const LeveledTerrain terrain(best.library[j], cfg.pipeline.grid, fix);
    fb.terrain_stats = terrain_stats(terrain.build(best.ladder[j].level)->terrain());
    fb.train_before = best.stats.per_terrain[j].before;
    fb.train_after = best.stats.per_terrain[j].after;
    for (const auto& p : best.library)
        fb.library_docs.push_back(p.doc);
    return fb;
}

// ---------------------------------------------------------------------------

RunArtifacts run_population(const RunConfig& cfg, const IterationCallback& on_iteration, EnvironmentGenerator& gen)
{
    const int N = cfg.agents;
    const int J = cfg.library_size;
    const std::optional<FixConfig> fix = cfg.pipeline.fix;
    const std::vector<double> weights = cfg.weights();
    const std::string& incontext = cfg.incontext();

    RunArtifacts out;
    out.config = cfg;

    GenerationStats pending_stats;
    auto initial = generate_initial(gen, incontext, N * J, derive_seed(cfg.seed, stream_initial), cfg.pipeline,
                                    &pending_stats);
    std::vector<std::size_t> order(initial.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(cfg.seed, stream_split));
    std::shuffle(order.begin(), order.end(), split_rng);

    std::vector<TrainJob> jobs(N);
    for (int k = 0; k < N; ++k) {
        jobs[k].policy = cfg.initial_policy;
        jobs[k].ladder.assign(J, CurriculumState{});
        for (int j = 0; j < J; ++j)
            jobs[k].library.push_back(initial[order[k * J + j]].program);
    }
    std::vector<AdmittedProgram> pending_transcripts = std::move(initial);

    ProxySet proxy(cfg.pipeline.grid, fix);
    std::vector<LearningProgress> history;

    for (int t = 1; t <= cfg.iterations; ++t) {
        IterationRecord rec;
        rec.iteration = t;
        rec.generation = pending_stats;
        collect_transcripts(rec, pending_transcripts);
        pending_stats = {};

        rec.agents = train_population(cfg, jobs, t, fix, rec, on_iteration);
        finish_scoring(rec, proxy);
        const AgentRecord& best = rec.agents[rec.best_agent];
        rec.benchmark_mean = evaluate_benchmark(best.policy_after.mean).mean;
        out.best_policy = best.policy_after;

        if (t < cfg.iterations) {
            Rng sel_rng(derive_seed(cfg.seed, stream_select + static_cast<std::uint64_t>(t)));
            for (int k = 0; k < N; ++k)
                rec.selection.push_back(static_cast<int>(soft_select(rec.proxy_scores, weights, sel_rng)));
        }
        out.iterations.push_back(rec);
        if (on_iteration)
            on_iteration(out.iterations.back());
        if (t == cfg.iterations)
            break;

        // evolve the best library N times, one independent draw per slot
        std::vector<std::optional<FeedbackBundle>> feedback(J);
        if (cfg.ablation != Ablation::no_feedback)
            for (int j = 0; j < J; ++j)
                feedback[j] = feedback_for(best, j, cfg, fix);
        const std::uint64_t evolve_seed = derive_seed(cfg.seed, stream_evolve + static_cast<std::uint64_t>(t));
        std::vector<AdmittedProgram> evolved(static_cast<std::size_t>(N * J));
        std::vector<GenerationStats> slot_stats(evolved.size());
        FailureStreak streak(std::max(1, cfg.pipeline.max_attempts));
        parallel_for(evolved.size(), static_cast<std::size_t>(gen.max_in_flight()), [&](std::size_t s) {
            const std::size_t j = s % J;
            Rng rng(derive_seed(evolve_seed, s));
            evolved[s] = evolve_env(gen, best.library[j], feedback[j], incontext, rng, cfg.pipeline, &slot_stats[s],
                                    &streak);
        });
        for (const auto& s : slot_stats)
            pending_stats += s;

        for (const auto& a : rec.agents)
            for (std::size_t j = 0; j < a.library.size(); ++j)
                history.push_back({a.library[j], a.stats.per_terrain[j].before.goals,
                                   a.stats.per_terrain[j].after.goals});

        Rng resample_rng(derive_seed(cfg.seed, stream_resample + static_cast<std::uint64_t>(t)));
        for (int k = 0; k < N; ++k) {
            TrainJob& job = jobs[k];
            job.initialized_from = rec.selection[k];
            job.policy = rec.agents[rec.selection[k]].policy_after;
            job.library.clear();
            job.ladder.clear();
            for (int j = 0; j < J; ++j) {
                job.library.push_back(evolved[k * J + j].program);
                // a variation starts where its parent's ladder ended
                job.ladder.push_back(CurriculumState{best.ladder[j].level, {}});
            }
            if (cfg.resampling_enabled) {
                const int replace = J / 2;
                const auto picks = resample_by_learning_progress(history, static_cast<std::size_t>(replace),
                                                                 resample_rng);
                for (int r = 0; r < replace; ++r) {
                    job.library[J - replace + r] = history[picks[r]].program;
                    job.ladder[J - replace + r] = CurriculumState{};
                }
            }
        }
        pending_transcripts = std::move(evolved);
    }
    if (!out.iterations.empty()) {
        const auto& last = out.iterations.back();
        out.best_policy = last.agents[last.best_agent].policy_after;
    }
    out.benchmark = evaluate_benchmark(out.best_policy.mean);
    return out;
}

/// One policy trained for T phases on random J-subsets of a fixed terrain set.
/// Ladder states persist per terrain across phases.
RunArtifacts run_fixed_set(const RunConfig& cfg, const std::vector<TerrainProgram>& fixed,
                           std::vector<AdmittedProgram> transcripts, const GenerationStats& gen_stats,
                           const std::optional<FixConfig>& fix, const IterationCallback& on_iteration)
{
    if (fixed.empty())
        throw EmptyLibrary("fixed terrain set is empty");
    RunArtifacts out;
    out.config = cfg;
    std::vector<CurriculumState> ladder(fixed.size());
    ProxySet proxy(cfg.pipeline.grid, fix);
    SkillPolicy policy = cfg.initial_policy;
    Rng subset_rng(derive_seed(cfg.seed, stream_subset));
    const std::size_t J = std::min<std::size_t>(static_cast<std::size_t>(cfg.library_size), fixed.size());

    for (int t = 1; t <= cfg.iterations; ++t) {
        IterationRecord rec;
        rec.iteration = t;
        if (t == 1) {
            rec.generation = gen_stats;
            collect_transcripts(rec, transcripts);
        }
        std::vector<std::size_t> idx(fixed.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), subset_rng);
        idx.resize(J);

        TrainJob job;
        job.policy = policy;
        job.initialized_from = t == 1 ? -1 : 0;
        for (std::size_t i : idx) {
            job.library.push_back(fixed[i]);
            job.ladder.push_back(ladder[i]);
        }
        std::vector<TrainJob> jobs{job};
        rec.agents = train_population(cfg, jobs, t, fix, rec, on_iteration);
        for (std::size_t r = 0; r < idx.size(); ++r)
            ladder[idx[r]] = CurriculumState{rec.agents[0].ladder[r].level, {}};
        policy = rec.agents[0].policy_after;

        finish_scoring(rec, proxy);
        rec.benchmark_mean = evaluate_benchmark(policy.mean).mean;
        if (t < cfg.iterations)
            rec.selection = {0};
        out.iterations.push_back(std::move(rec));
        if (on_iteration)
            on_iteration(out.iterations.back());
    }
    out.best_policy = policy;
    out.benchmark = evaluate_benchmark(policy.mean);
    return out;
}

std::vector<TerrainProgram> programs_of(const std::vector<AdmittedProgram>& admitted)
{
    std::vector<TerrainProgram> out;
    for (const auto& a : admitted)
        out.push_back(a.program);
    return out;
}

} // namespace

std::string_view ablation_name(Ablation a)
{
    for (const auto& [value, name] : ablation_names)
        if (value == a)
            return name;
    return "none";
}

std::optional<Ablation> ablation_from_name(std::string_view name)
{
    for (const auto& [value, n] : ablation_names)
        if (n == name)
            return value;
    return std::nullopt;
}

std::string_view generator_name(GeneratorKind g) { return g == GeneratorKind::mock ? "mock" : "remote"; }

std::optional<GeneratorKind> generator_from_name(std::string_view name)
{
    if (name == "mock")
        return GeneratorKind::mock;
    if (name == "remote")
        return GeneratorKind::remote;
    return std::nullopt;
}

void RunConfig::validate() const
{
    if (iterations < 1 || agents < 1 || library_size < 1)
        throw ConfigError("iterations, agents and library_size must all be at least 1");
    if (trainer.budget <= 0 || trainer.candidates < 2 || trainer.generations < 1)
        throw ConfigError("trainer needs budget > 0, candidates >= 2 and generations >= 1");
    trainer.ladder.validate();
    const auto w = weights();
    if (w.size() < static_cast<std::size_t>(agents))
        throw ConfigError("need one selection weight per agent");
    double sum = 0.0;
    for (double x : w) {
        if (x < 0.0)
            throw ConfigError("selection weights must be non-negative");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("selection weights must sum to 1");
    if (!within_bounds(initial_policy.mean))
        throw ConfigError("initial policy mean is outside the skill bounds");
}

std::vector<double> RunConfig::weights() const
{
    return selection_weights.empty() ? default_selection_weights(static_cast<std::size_t>(agents)) : selection_weights;
}

const std::string& RunConfig::incontext() const
{
    return incontext_program.empty() ? default_incontext_program() : incontext_program;
}

std::vector<double> RunArtifacts::curve() const
{
    std::vector<double> c;
    for (const auto& it : iterations)
        c.push_back(it.benchmark_mean);
    return c;
}

RunArtifacts run_coevolution(const RunConfig& cfg, const IterationCallback& on_iteration,
                             EnvironmentGenerator* generator)
{
    cfg.validate();
    std::unique_ptr<EnvironmentGenerator> owned;
    if (!generator) {
        owned = make_generator(cfg);
        generator = owned.get();
    }
    EnvironmentGenerator& gen = *generator;
    const std::optional<FixConfig> fix = cfg.pipeline.fix;
    const int count = cfg.agents * cfg.library_size;

    switch (cfg.ablation) {
    case Ablation::none:
    case Ablation::no_feedback:
    case Ablation::random_baseline:
        return run_population(cfg, on_iteration, gen);

    case Ablation::initial_only: {
        GenerationStats stats;
        auto admitted = generate_initial(gen, cfg.incontext(), count, derive_seed(cfg.seed, stream_initial),
                                         cfg.pipeline, &stats);
        const auto fixed = programs_of(admitted);
        return run_fixed_set(cfg, fixed, std::move(admitted), stats, fix, on_iteration);
    }
    case Ablation::diversity_only: {
        GenerationStats stats;
        auto admitted = generate_sequential(gen, cfg.incontext(), count, derive_seed(cfg.seed, stream_initial),
                                            cfg.pipeline, &stats);
        const auto fixed = programs_of(admitted);
        return run_fixed_set(cfg, fixed, std::move(admitted), stats, fix, on_iteration);
    }
    case Ablation::final_only: {
        // the full method supplies the terrains; only its last libraries are kept
        RunConfig inner = cfg;
        inner.ablation = Ablation::none;
        const RunArtifacts full = run_population(inner, {}, gen);
        std::vector<TerrainProgram> fixed;
        std::unordered_set<std::string> seen;
        for (const auto& a : full.iterations.back().agents)
            for (const auto& p : a.library)
                if (seen.insert(format_program(p)).second)
                    fixed.push_back(p);
        return run_fixed_set(cfg, fixed, {}, {}, fix, on_iteration);
    }
    case Ablation::oracle:
        return run_fixed_set(cfg, benchmark_suite().programs(), {}, {}, std::nullopt, on_iteration);
    }
    throw ConfigError("unknown ablation");
}

std::vector<std::size_t> resample_by_learning_progress(std::span<const LearningProgress> history, std::size_t count,
                                                       Rng& rng, double epsilon)
{
    if (history.empty())
        return {};
    std::vector<double> w;
    w.reserve(history.size());
    for (const auto& h : history)
        w.push_back(std::max(epsilon, h.goals_after - h.goals_before));
    std::discrete_distribution<std::size_t> dist(w.begin(), w.end());
    std::vector<std::size_t> out(count);
    for (auto& i : out)
        i = dist(rng);
    return out;
}

} // namespace terraverse
