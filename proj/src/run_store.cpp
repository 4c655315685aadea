#include <terraverse/config.hpp>
#include <terraverse/error.hpp>
#include <terraverse/render.hpp>
#include <terraverse/run_store.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>

namespace terraverse {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::trunc)
{
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::out | mode);
    if (!out)
        throw Error("cannot write " + p.string());
    return out;
}

void write_json(const fs::path& p, const nlohmann::json& j)
{
    open_out(p) << j.dump(2) << '\n';
}

std::string numbered(const char* prefix, std::size_t i, const char* suffix = "")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%03zu%s", prefix, i, suffix);
    return buf;
}

} // namespace

std::string make_run_id(const RunConfig& cfg, std::chrono::system_clock::time_point when)
{
    const std::time_t tt = std::chrono::system_clock::to_time_t(when);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &tm);
    return "seed" + std::to_string(cfg.seed) + "-" + stamp + "-" + config_hash(cfg);
}

RunStore::RunStore(const fs::path& root, std::string run_id) : run_id_(std::move(run_id)), dir_(root / run_id_)
{
    if (fs::exists(dir_))
        throw Error("run directory already exists: " + dir_.string());
    fs::create_directories(dir_);
}

void RunStore::write_config(const RunConfig& cfg) const { write_json(dir_ / "config.json", config_to_json(cfg)); }

nlohmann::json agent_stats_record(const IterationRecord& rec, const AgentRecord& a)
{
    nlohmann::json j = {{"iteration", rec.iteration},
                        {"agent", a.agent},
                        {"initialized_from", a.initialized_from},
                        {"policy_before", a.policy_before},
                        {"policy_after", a.policy_after},
                        {"train", a.stats}};
    if (static_cast<std::size_t>(a.agent) < rec.proxy_scores.size())
        j["proxy_score"] = rec.proxy_scores[a.agent];
    return j;
}

void RunStore::write_iteration(const IterationRecord& rec) const
{
    const fs::path it = dir_ / ("iter_" + std::to_string(rec.iteration));
    for (const auto& a : rec.agents) {
        const fs::path ad = it / ("agent_" + std::to_string(a.agent));
        for (std::size_t j = 0; j < a.library.size(); ++j)
            open_out(ad / "library" / (numbered("", j, "_") + a.library[j].name + ".terrain"))
                << format_program(a.library[j]);
        nlohmann::json ladder = {{"start", a.ladder_start}, {"end", a.ladder}};
        write_json(ad / "ladder.json", ladder);
        write_json(ad / "policy.json", {{"before", a.policy_before}, {"after", a.policy_after}});
        auto stats = open_out(ad / "train_stats.jsonl");
        for (const auto& t : a.stats.per_terrain)
            stats << nlohmann::json{{"terrain", t.terrain},
                                    {"before", t.before},
                                    {"after", t.after},
                                    {"final_level", t.final_level}}
                         .dump()
                  << '\n';
        stats << nlohmann::json{{"summary", a.stats}}.dump() << '\n';
    }
    nlohmann::json scores = {{"proxy_size", rec.proxy_size}, {"scores", rec.proxy_scores}, {"best_agent", rec.best_agent},
                             {"benchmark_mean_of_best", rec.benchmark_mean}};
    write_json(it / "proxy_scores.json", scores);
    write_json(it / "selection.json", {{"next_agent_from", rec.selection}});
    write_json(it / "generation.json", rec.generation);
    write_json(it / "status.json", {{"partial", rec.partial}, {"failure", rec.failure}});
    for (std::size_t i = 0; i < rec.transcripts.size(); ++i)
        write_json(it / "transcripts" / numbered("", i, ".json"), rec.transcripts[i]);

    auto lines = open_out(dir_ / "stats.jsonl", std::ios::app);
    for (const auto& a : rec.agents)
        lines << agent_stats_record(rec, a).dump() << '\n';
}

void write_curve_csv(const std::vector<double>& curve, std::ostream& os)
{
    os << "iteration,benchmark_mean\n" << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < curve.size(); ++i)
        os << i + 1 << ',' << curve[i] << '\n';
}

void RunStore::write_final(const RunArtifacts& run) const
{
    const fs::path f = dir_ / "final";
    write_json(f / "best_policy.json", run.best_policy);
    {
        auto csv = open_out(f / "benchmark.csv");
        write_benchmark_csv(run.benchmark, csv);
    }
    write_json(f / "benchmark_summary.json", benchmark_summary(run.benchmark));
    const auto curve = run.curve();
    {
        auto csv = open_out(f / "curve.csv");
        write_curve_csv(curve, csv);
    }
    auto svg = open_out(f / "curve.svg");
    write_line_chart_svg({{std::string(ablation_name(run.config.ablation)), curve}}, "benchmark mean goals",
                         "goals reached", svg);
}

SkillPolicy load_policy(const fs::path& p)
{
    fs::path file = p;
    if (fs::is_directory(p))
        file = p / "final" / "best_policy.json";
    std::ifstream in(file);
    if (!in)
        throw ConfigError("no policy at " + file.string());
    try {
        SkillPolicy policy = nlohmann::json::parse(in).get<SkillPolicy>();
        if (!within_bounds(policy.mean))
            throw ConfigError("policy mean outside skill bounds in " + file.string());
        return policy;
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

} // namespace terraverse
