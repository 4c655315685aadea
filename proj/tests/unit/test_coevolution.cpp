#include <terraverse/config.hpp>
#include <terraverse/error.hpp>
#include <terraverse/run_store.hpp>

#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace terraverse;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(Ablation ablation = Ablation::none, std::uint64_t seed = 0)
{
    RunConfig cfg;
    cfg.iterations = 2;
    cfg.agents = 2;
    cfg.library_size = 2;
    cfg.seed = seed;
    cfg.ablation = ablation;
    return cfg;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("terraverse_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Every assistant message in a slot transcript: the parents shown to the generator.
std::vector<std::string> parents_in(const nlohmann::json& slot)
{
    std::vector<std::string> out;
    for (const auto& attempt : slot.at("attempts"))
        if (attempt.contains("messages"))
            for (const auto& m : attempt.at("messages"))
                if (m.at("role") == "assistant") {
                    const auto body = extract_fenced_block(m.at("content").get<std::string>());
                    REQUIRE(body.has_value());
                    out.push_back(format_program(parse_program(*body)));
                }
    return out;
}

} // namespace

TEST_CASE("small run completes quickly with the expected shape")
{
    const auto t0 = std::chrono::steady_clock::now();
    const RunArtifacts run = run_coevolution(small_config());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 10.0);
    REQUIRE(run.iterations.size() == 2);
    std::set<std::string> all;
    for (const auto& it : run.iterations) {
        CHECK(!it.partial);
        REQUIRE(it.agents.size() == 2);
        for (const auto& a : it.agents) {
            CHECK(a.library.size() == 2);
            CHECK(a.ladder.size() == 2);
            CHECK(a.stats.evaluations_used <= run.config.trainer.budget);
            for (const auto& p : a.library) {
                CHECK(admissible(p, run.config.pipeline));
                all.insert(format_program(p));
            }
        }
        CHECK(it.proxy_size == all.size());
        CHECK(it.proxy_scores.size() == 2);
        CHECK(it.best_agent >= 0);
        CHECK(it.best_agent < 2);
    }
    CHECK(run.iterations[0].selection.size() == 2);
    CHECK(run.curve().size() == 2);
    CHECK(run.benchmark.rows.size() == 200);
    CHECK(run.benchmark.mean == run.iterations.back().benchmark_mean);
}

TEST_CASE("runs are deterministic")
{
    const auto a = run_coevolution(small_config(Ablation::none, 3));
    const auto b = run_coevolution(small_config(Ablation::none, 3));
    CHECK(a.curve() == b.curve());
    CHECK(a.best_policy == b.best_policy);
    for (std::size_t t = 0; t < a.iterations.size(); ++t)
        for (std::size_t k = 0; k < a.iterations[t].agents.size(); ++k) {
            CHECK(a.iterations[t].agents[k].library == b.iterations[t].agents[k].library);
            CHECK(agent_stats_record(a.iterations[t], a.iterations[t].agents[k]).dump()
                  == agent_stats_record(b.iterations[t], b.iterations[t].agents[k]).dump());
        }
}

TEST_CASE("evolved libraries descend from the best agent's library")
{
    RunConfig cfg = small_config();
    cfg.iterations = 3;
    const auto run = run_coevolution(cfg);
    for (std::size_t t = 1; t < run.iterations.size(); ++t) {
        const auto& prev = run.iterations[t - 1];
        std::set<std::string> best_lib;
        for (const auto& p : prev.agents[prev.best_agent].library)
            best_lib.insert(format_program(p));
        const auto& slots = run.iterations[t].transcripts;
        CHECK(slots.size() == static_cast<std::size_t>(cfg.agents * cfg.library_size));
        for (const auto& slot : slots) {
            CHECK(slot.at("kind") == "evolve");
            const auto parents = parents_in(slot);
            CHECK(!parents.empty());
            for (const auto& parent : parents)
                CHECK(best_lib.count(parent) == 1);
        }
    }
}

TEST_CASE("benchmark programs never reach a generator")
{
    RunConfig cfg = small_config();
    const auto run = run_coevolution(cfg);
    std::string dump;
    for (const auto& it : run.iterations)
        for (const auto& t : it.transcripts)
            dump += t.dump();
    REQUIRE(!dump.empty());
    for (const auto& p : benchmark_suite().programs()) {
        CHECK(dump.find(format_program(p)) == std::string::npos);
        CHECK(dump.find("\"" + p.name + "\"") == std::string::npos);
    }
}

TEST_CASE("no-feedback runs ask for harder terrains")
{
    const auto run = run_coevolution(small_config(Ablation::no_feedback));
    const auto& slots = run.iterations.at(1).transcripts;
    REQUIRE(!slots.empty());
    for (const auto& slot : slots) {
        const std::string s = slot.dump();
        CHECK(s.find(nlohmann::json(std::string(harder_instruction)).dump().substr(1, 40)) != std::string::npos);
        CHECK(s.find("goals_after") == std::string::npos);
    }
    const auto fed = run_coevolution(small_config());
    CHECK(fed.iterations.at(1).transcripts.front().dump().find("goals_after") != std::string::npos);
}

TEST_CASE("every ablation runs")
{
    for (Ablation a : {Ablation::initial_only, Ablation::final_only, Ablation::diversity_only,
                       Ablation::random_baseline, Ablation::oracle}) {
        INFO(ablation_name(a));
        const auto run = run_coevolution(small_config(a));
        CHECK(run.iterations.size() == 2);
        CHECK(run.benchmark.rows.size() == 200);
        CHECK(ablation_from_name(ablation_name(a)) == a);
    }
}

TEST_CASE("run store writes the artifact tree")
{
    const fs::path root = scratch("store");
    const RunConfig cfg = small_config();
    const RunStore store(root, make_run_id(cfg, std::chrono::system_clock::now()));
    store.write_config(cfg);
    const auto run = run_coevolution(cfg, [&](const IterationRecord& rec) { store.write_iteration(rec); });
    store.write_final(run);
    const fs::path d = store.dir();
    CHECK(store.run_id().rfind("seed0-", 0) == 0);
    CHECK(store.run_id().find(config_hash(cfg)) != std::string::npos);
    CHECK(fs::exists(d / "config.json"));
    for (int t = 1; t <= 2; ++t) {
        const fs::path it = d / ("iter_" + std::to_string(t));
        for (const char* f : {"proxy_scores.json", "selection.json", "generation.json", "status.json"})
            CHECK(fs::exists(it / f));
        CHECK(fs::exists(it / "transcripts"));
        for (int k = 0; k < 2; ++k) {
            const fs::path ad = it / ("agent_" + std::to_string(k));
            for (const char* f : {"train_stats.jsonl", "ladder.json", "policy.json"})
                CHECK(fs::exists(ad / f));
            int n = 0;
            for (const auto& e : fs::directory_iterator(ad / "library")) {
                CHECK(e.path().extension() == ".terrain");
                CHECK_NOTHROW(parse_program(slurp(e.path())));
                ++n;
            }
            CHECK(n == 2);
        }
    }
    for (const char* f : {"best_policy.json", "benchmark.csv", "benchmark_summary.json", "curve.csv", "curve.svg"})
        CHECK(fs::exists(d / "final" / f));
    std::istringstream lines(slurp(d / "stats.jsonl"));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        CHECK_NOTHROW(nlohmann::json::parse(line));
        ++n;
    }
    CHECK(n == 4);
    CHECK(load_policy(d) == run.best_policy);
    CHECK(load_policy(d / "final" / "best_policy.json") == run.best_policy);
    CHECK_THROWS_AS(load_policy(root / "missing"), ConfigError);
    fs::remove_all(root);
}

TEST_CASE("config files")
{
    const nlohmann::json base = {{"config_version", 1}, {"iterations", 3}, {"agents", 4}, {"seed", 9}};
    const RunConfig cfg = config_from_json(base);
    CHECK(cfg.iterations == 3);
    CHECK(cfg.agents == 4);
    CHECK(cfg.seed == 9);
    CHECK(cfg.library_size == 10);
    CHECK(config_from_json(config_to_json(cfg)).seed == 9);
    CHECK(config_hash(cfg) == config_hash(config_from_json(config_to_json(cfg))));
    CHECK(config_hash(cfg) != config_hash(small_config()));

    nlohmann::json keyed = base;
    keyed["remote"] = {{"api_key", "sk-secret"}};
    CHECK_THROWS_AS(config_from_json(keyed), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"iterations", 3}}), ConfigError);
    CHECK_THROWS_AS(config_from_json({{"config_version", 2}}), ConfigError);
    nlohmann::json bad = base;
    bad["agents"] = 0;
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = base;
    bad["ablation"] = "nonsense";
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);

    RunConfig with_key = cfg;
    with_key.remote.api_key = "sk-secret";
    CHECK(config_to_json(with_key).dump().find("sk-secret") == std::string::npos);

    const fs::path root = scratch("config");
    std::ofstream(root / "c.json") << base.dump();
    ::setenv("TERRAVERSE_ENDPOINT", "http://example.invalid/v1/chat/completions", 1);
    CHECK(load_config(root / "c.json").remote.url == "http://example.invalid/v1/chat/completions");
    ::unsetenv("TERRAVERSE_ENDPOINT");
    CHECK(load_config(root / "c.json").remote.url == RemoteConfig{}.url);
    CHECK_THROWS_AS(load_config(root / "missing.json"), ConfigError);
    std::ofstream(root / "broken.json") << "{ not json";
    CHECK_THROWS_AS(load_config(root / "broken.json"), ConfigError);
    fs::remove_all(root);
}

TEST_CASE("run configuration validation")
{
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.weights() == std::vector<double>{0.75, 0.25, 0, 0, 0, 0, 0, 0});
    cfg.selection_weights = {0.5, 0.6};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.library_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
