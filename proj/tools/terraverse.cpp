// terraverse command-line entry point.

#include <terraverse/bench.hpp>
#include <terraverse/coevolution.hpp>
#include <terraverse/config.hpp>
#include <terraverse/error.hpp>
#include <terraverse/render.hpp>
#include <terraverse/run_store.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace terraverse;

namespace {

enum Exit : int { ok = 0, check_failed = 1, config_error = 2, generator_exhausted = 3, training_failure = 4 };

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool verbose = false;
};

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TerrainProgram read_program(const fs::path& p)
{
    const std::string text = read_file(p);
    try {
        return parse_program(text);
    }
    catch (const Error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

RunConfig base_config(const Globals& g)
{
    RunConfig cfg;
    if (!g.config.empty())
        cfg = load_config(g.config);
    else
        apply_environment(cfg);
    if (g.seed)
        cfg.seed = *g.seed;
    return cfg;
}

void write_text(const fs::path& p, const std::string& text)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw Error("cannot write " + p.string());
    out << text;
}

std::string difficulty_tag(double d)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "d%.2f", d);
    return buf;
}

double checked_difficulty(double d)
{
    if (!(d >= 0.0 && d <= 1.0))
        throw ConfigError("difficulty must lie in [0, 1]");
    return d;
}

/// Maps the error taxonomy onto exit codes; anything unexpected is reported as a failure of the command.
int report(const std::exception& e, int fallback)
{
    std::cerr << "error: " << e.what() << '\n';
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SyntaxError*>(&e))
        return config_error;
    if (dynamic_cast<const GeneratorExhausted*>(&e) || dynamic_cast<const AuthError*>(&e))
        return generator_exhausted;
    if (dynamic_cast<const TrainingError*>(&e))
        return training_failure;
    return fallback;
}

// ---------------------------------------------------------------------------

struct RunArgs {
    std::string generator;
    std::string ablation;
    int iterations = 0;
    int agents = 0;
    int library_size = 0;
};

int cmd_run(const Globals& g, const RunArgs& a)
{
    RunConfig cfg = base_config(g);
    if (!a.generator.empty()) {
        const auto kind = generator_from_name(a.generator);
        if (!kind)
            throw ConfigError("--generator must be mock or remote");
        cfg.generator = *kind;
    }
    if (!a.ablation.empty()) {
        const auto abl = ablation_from_name(a.ablation);
        if (!abl)
            throw ConfigError("unknown ablation " + a.ablation);
        cfg.ablation = *abl;
    }
    if (a.iterations)
        cfg.iterations = a.iterations;
    if (a.agents) {
        cfg.agents = a.agents;
        cfg.selection_weights.clear();
    }
    if (a.library_size)
        cfg.library_size = a.library_size;
    cfg.validate();

    const fs::path root = g.out.empty() ? fs::path("runs") : fs::path(g.out);
    const RunStore store(root, make_run_id(cfg, std::chrono::system_clock::now()));
    store.write_config(cfg);
    std::cout << "run " << store.run_id() << "\n" << std::flush;
    const RunArtifacts run = run_coevolution(cfg, [&](const IterationRecord& rec) {
        store.write_iteration(rec);
        if (g.verbose)
            std::cerr << "iteration " << rec.iteration << ": best agent " << rec.best_agent << ", proxy "
                      << rec.proxy_scores.at(rec.best_agent) << ", benchmark " << rec.benchmark_mean << '\n';
    });
    store.write_final(run);
    std::printf("final benchmark mean %.4f\n", run.benchmark.mean);
    std::cout << store.dir().string() << '\n';
    return ok;
}

struct RenderArgs {
    std::string file;
    double difficulty = 0.0;
    std::string format = "pgm";
    bool to_stdout = false;
    bool fixed = false;
};

int cmd_render(const Globals& g, const RenderArgs& a)
{
    const auto format = render_format_from_name(a.format);
    if (!format)
        throw ConfigError("--format must be pgm, svg or ascii");
    const TerrainProgram program = read_program(a.file);
    CompiledTerrain t;
    try {
        t = compile(program, checked_difficulty(a.difficulty));
    }
    catch (const Error& e) {
        throw ConfigError(a.file + ": " + e.what());
    }
    if (a.fixed)
        t = auto_fix(t).first;
    std::ostringstream ss;
    render(t, *format, ss);
    if (a.to_stdout) {
        std::cout << ss.str();
        return ok;
    }
    const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
    const fs::path path = dir / (fs::path(a.file).stem().string() + "_" + difficulty_tag(a.difficulty)
                                 + std::string(render_extension(*format)));
    write_text(path, ss.str());
    std::cout << path.string() << '\n';
    return ok;
}

struct BenchArgs {
    std::string source;
    bool sweep = false;
};

int cmd_bench(const Globals& g, const BenchArgs& a)
{
    const fs::path source(a.source);
    if (!fs::exists(source))
        throw ConfigError("no run directory or policy file at " + a.source);
    const SkillPolicy policy = load_policy(source);
    const fs::path dir = !g.out.empty() ? fs::path(g.out)
                         : fs::is_directory(source) ? source / "bench"
                                                    : fs::path("bench");
    const BenchmarkResult r = evaluate_benchmark(policy.mean);
    std::ostringstream csv;
    write_benchmark_csv(r, csv);
    write_text(dir / "benchmark.csv", csv.str());
    write_text(dir / "benchmark_summary.json", benchmark_summary(r).dump(2) + "\n");
    std::printf("benchmark mean %.4f\n", r.mean);

    if (a.sweep) {
        if (!fs::is_directory(source))
            throw ConfigError("--sweep needs a run directory");
        std::vector<double> curve;
        for (int t = 1;; ++t) {
            const fs::path it = source / ("iter_" + std::to_string(t));
            if (!fs::exists(it / "proxy_scores.json"))
                break;
            const auto scores = nlohmann::json::parse(read_file(it / "proxy_scores.json"));
            const int best = scores.at("best_agent").get<int>();
            const auto pol = nlohmann::json::parse(read_file(it / ("agent_" + std::to_string(best)) / "policy.json"));
            curve.push_back(evaluate_benchmark(pol.at("after").get<SkillPolicy>().mean).mean);
        }
        if (curve.empty())
            throw ConfigError("no finished iterations under " + a.source);
        std::ostringstream ccsv, svg;
        write_curve_csv(curve, ccsv);
        write_line_chart_svg({{"best policy", curve}}, "benchmark mean goals", "goals reached", svg);
        write_text(dir / "curve.csv", ccsv.str());
        write_text(dir / "curve.svg", svg.str());
    }
    std::cout << dir.string() << '\n';
    return ok;
}

int cmd_check(const std::string& file)
{
    const TerrainProgram program = read_program(file);
    const ValidityReport r = check_program(program);
    std::cout << nlohmann::json(r).dump(2) << '\n';
    return r.passed ? ok : check_failed;
}

int cmd_fix(const Globals& g, const std::string& file)
{
    const TerrainProgram program = read_program(file);
    const FixConfig fix;
    nlohmann::json levels = nlohmann::json::array();
    for (double d : default_difficulty_samples()) {
        nlohmann::json entry = {{"difficulty", d}};
        try {
            const CompiledTerrain raw = compile(program, d);
            const auto [fixed, log] = auto_fix(raw, fix);
            entry["fixes"] = log;
            entry["patch"] = diff_grids(raw, fixed);
        }
        catch (const Error& e) {
            entry["error"] = e.what();
        }
        levels.push_back(std::move(entry));
    }
    const ValidityReport before = check_program(program);
    const ValidityReport after = check_program(program, {}, {}, {}, &fix);

    const fs::path in(file);
    const fs::path dir = g.out.empty() ? (in.has_parent_path() ? in.parent_path() : fs::path(".")) : fs::path(g.out);
    const std::string stem = in.stem().string();
    const fs::path terrain_out = dir / (stem + ".fixed.terrain");
    const fs::path patch_out = dir / (stem + ".patch.json");
    // fixes act on compiled grids, so the program text is kept and the patch travels beside it
    write_text(terrain_out, "# grid patches applied after compile: " + patch_out.filename().string() + "\n"
                                + format_program(program));
    write_text(patch_out, nlohmann::json{{"source", in.filename().string()}, {"levels", levels}}.dump(2) + "\n");

    std::cout << nlohmann::json{{"before", before}, {"after", after}, {"fixed_terrain", terrain_out.string()},
                                {"patch", patch_out.string()}}
                     .dump(2)
              << '\n';
    return after.passed ? ok : check_failed;
}

struct GenerateArgs {
    int count = 1;
    std::string generator;
    bool sequential = false;
};

int cmd_generate(const Globals& g, const GenerateArgs& a)
{
    if (a.count < 0)
        throw ConfigError("--count must be non-negative");
    RunConfig cfg = base_config(g);
    if (!a.generator.empty()) {
        const auto kind = generator_from_name(a.generator);
        if (!kind)
            throw ConfigError("--generator must be mock or remote");
        cfg.generator = *kind;
    }
    std::unique_ptr<EnvironmentGenerator> gen;
    if (cfg.generator == GeneratorKind::remote)
        gen = std::make_unique<RemoteGenerator>(cfg.remote);
    else
        gen = std::make_unique<MockGenerator>(cfg.ablation == Ablation::random_baseline ? MockMode::random_baseline
                                                                                         : MockMode::standard);
    GenerationStats stats;
    const auto programs = a.sequential
                              ? generate_sequential(*gen, cfg.incontext(), a.count, cfg.seed, cfg.pipeline, &stats)
                              : generate_initial(*gen, cfg.incontext(), a.count, cfg.seed, cfg.pipeline, &stats);
    const fs::path dir = g.out.empty() ? fs::path("generated") : fs::path(g.out);
    for (std::size_t i = 0; i < programs.size(); ++i) {
        char prefix[16];
        std::snprintf(prefix, sizeof prefix, "%03zu_", i);
        write_text(dir / (prefix + programs[i].program.name + ".terrain"), format_program(programs[i].program));
        write_text(dir / "transcripts" / (std::string(prefix) + "transcript.json"),
                   programs[i].transcript.dump(2) + "\n");
    }
    write_text(dir / "generation.json", nlohmann::json(stats).dump(2) + "\n");
    std::cout << nlohmann::json(stats).dump() << '\n' << dir.string() << '\n';
    return ok;
}

struct ReplayArgs {
    std::string source;
    std::vector<std::string> terrains;
    std::optional<double> difficulty;
    std::string path_csv;
};

int cmd_replay(const ReplayArgs& a)
{
    const SkillPolicy policy = load_policy(a.source);
    if (a.terrains.empty()) {
        std::printf("benchmark mean %.4f\n", evaluate_benchmark(policy.mean).mean);
        return ok;
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& file : a.terrains) {
        const TerrainProgram program = read_program(file);
        std::vector<double> ds = a.difficulty ? std::vector<double>{checked_difficulty(*a.difficulty)}
                                              : default_difficulty_samples();
        for (double d : ds) {
            const EpisodeResult r = rollout(auto_fix(compile(program, d)).first, policy.mean);
            nlohmann::json j = {{"terrain", file},
                                {"difficulty", d},
                                {"goals_reached", r.goals_reached},
                                {"steps", r.steps},
                                {"edge_violations", r.edge_violations},
                                {"terminated", termination_name(r.terminated)}};
            out.push_back(std::move(j));
            if (!a.path_csv.empty() && a.terrains.size() == 1 && ds.size() == 1) {
                std::ostringstream ss;
                write_path_csv(r.path, ss);
                write_text(a.path_csv, ss.str());
            }
        }
    }
    std::cout << out.dump(2) << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Terrain co-evolution toolkit: generate, check, train against and benchmark parkour courses."};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config, "run config (JSON, config_version = 1)");
    auto* seed_opt = app.add_option("--seed", seed, "base seed");
    app.add_option("--out", g.out, "output directory");
    app.add_flag("-v,--verbose", g.verbose, "progress on stderr");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "co-evolve terrains and policies, then benchmark the best policy");
    run->add_option("--generator", run_args.generator, "mock or remote");
    run->add_option("--ablation", run_args.ablation,
                    "none, no_feedback, initial_only, final_only, diversity_only, random_baseline, oracle");
    run->add_option("--iterations", run_args.iterations, "override T")->check(CLI::PositiveNumber);
    run->add_option("--agents", run_args.agents, "override N")->check(CLI::PositiveNumber);
    run->add_option("--library-size", run_args.library_size, "override J")->check(CLI::PositiveNumber);

    RenderArgs render_args;
    auto* rend = app.add_subcommand("render", "draw a terrain with its goals");
    rend->add_option("file", render_args.file, "terrain program")->required();
    rend->add_option("--difficulty,-d", render_args.difficulty, "d in [0, 1]");
    rend->add_option("--format,-f", render_args.format, "pgm, svg or ascii");
    rend->add_flag("--stdout", render_args.to_stdout, "print instead of writing a file");
    rend->add_flag("--fixed", render_args.fixed, "render after auto-fixing");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "evaluate a stored policy on the held-out suite");
    bench->add_option("source", bench_args.source, "run directory or policy JSON")->required();
    bench->add_flag("--sweep", bench_args.sweep, "also score the best policy of every iteration");

    std::string check_file;
    auto* check = app.add_subcommand("check", "print the validity report of a terrain");
    check->add_option("file", check_file, "terrain program")->required();

    std::string fix_file;
    auto* fix = app.add_subcommand("fix", "auto-fix a terrain; writes <name>.fixed.terrain and <name>.patch.json");
    fix->add_option("file", fix_file, "terrain program")->required();

    GenerateArgs gen_args;
    auto* gen = app.add_subcommand("generate", "sample terrains from the generator");
    gen->add_option("--count,-n", gen_args.count, "number of programs");
    gen->add_option("--generator", gen_args.generator, "mock or remote");
    gen->add_flag("--sequential", gen_args.sequential, "condition each sample on the earlier docs");

    ReplayArgs replay_args;
    double replay_d = 0.0;
    auto* replay = app.add_subcommand("replay", "re-evaluate a stored policy");
    replay->add_option("source", replay_args.source, "run directory or policy JSON")->required();
    replay->add_option("terrains", replay_args.terrains, "terrain programs (default: benchmark)");
    auto* replay_d_opt = replay->add_option("--difficulty,-d", replay_d, "single difficulty (default: all levels)");
    replay->add_option("--path-csv", replay_args.path_csv, "write the path of a single rollout");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }
    if (*seed_opt)
        g.seed = seed;
    if (*replay_d_opt)
        replay_args.difficulty = replay_d;

    try {
        if (*run)
            return cmd_run(g, run_args);
        if (*rend)
            return cmd_render(g, render_args);
        if (*bench)
            return cmd_bench(g, bench_args);
        if (*check)
            return cmd_check(check_file);
        if (*fix)
            return cmd_fix(g, fix_file);
        if (*gen)
            return cmd_generate(g, gen_args);
        if (*replay)
            return cmd_replay(replay_args);
    }
    catch (const std::exception& e) {
        const bool running = *run || *gen;
        return report(e, running ? training_failure : check_failed);
    }
    return ok;
}
