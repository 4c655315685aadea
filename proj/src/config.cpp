#include <terraverse/config.hpp>
#include <terraverse/error.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace terraverse {

namespace {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

void read_trainer(const nlohmann::json& j, TrainerConfig& t)
{
    read_opt(j, "candidates", t.candidates);
    read_opt(j, "generations", t.generations);
    read_opt(j, "budget", t.budget);
    read_opt(j, "elite_fraction", t.elite_fraction);
    read_opt(j, "min_spread", t.min_spread);
    if (j.contains("ladder"))
        t.ladder = j.at("ladder").get<LadderConfig>();
}

void read_remote(const nlohmann::json& j, RemoteConfig& r)
{
    if (j.contains("api_key"))
        throw ConfigError("api keys do not belong in config files; set TERRAVERSE_API_KEY");
    read_opt(j, "url", r.url);
    read_opt(j, "model", r.model);
    read_opt(j, "max_retries", r.max_retries);
    read_opt(j, "backoff_ms", r.backoff_ms);
    read_opt(j, "timeout_s", r.timeout_s);
    read_opt(j, "in_flight", r.in_flight);
    if (r.max_retries < 0 || r.backoff_ms < 0 || r.timeout_s <= 0 || r.in_flight < 1)
        throw ConfigError("remote settings out of range");
}

} // namespace

void apply_environment(RunConfig& cfg)
{
    if (const char* ep = std::getenv("TERRAVERSE_ENDPOINT"); ep && *ep)
        cfg.remote.url = ep;
}

RunConfig config_from_json(const nlohmann::json& j)
{
    RunConfig cfg;
    try {
        if (!j.is_object())
            throw ConfigError("config must be a JSON object");
        if (!j.contains("config_version") || j.at("config_version").get<int>() != config_version)
            throw ConfigError("unsupported or missing config_version (expected 1)");
        read_opt(j, "iterations", cfg.iterations);
        read_opt(j, "agents", cfg.agents);
        read_opt(j, "library_size", cfg.library_size);
        read_opt(j, "seed", cfg.seed);
        if (j.contains("generator")) {
            const auto g = generator_from_name(j.at("generator").get<std::string>());
            if (!g)
                throw ConfigError("generator must be mock or remote");
            cfg.generator = *g;
        }
        if (j.contains("ablation")) {
            const auto a = ablation_from_name(j.at("ablation").get<std::string>());
            if (!a)
                throw ConfigError("unknown ablation " + j.at("ablation").dump());
            cfg.ablation = *a;
        }
        read_opt(j, "resampling_enabled", cfg.resampling_enabled);
        read_opt(j, "temperature", cfg.pipeline.temperature);
        read_opt(j, "max_attempts", cfg.pipeline.max_attempts);
        read_opt(j, "selection_weights", cfg.selection_weights);
        read_opt(j, "incontext_program", cfg.incontext_program);
        read_opt(j, "threads", cfg.threads);
        if (j.contains("trainer"))
            read_trainer(j.at("trainer"), cfg.trainer);
        if (j.contains("initial_policy"))
            cfg.initial_policy = j.at("initial_policy").get<SkillPolicy>();
        if (j.contains("remote"))
            read_remote(j.at("remote"), cfg.remote);
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (cfg.pipeline.max_attempts < 1)
        throw ConfigError("max_attempts must be at least 1");
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    RunConfig cfg = config_from_json(j);
    apply_environment(cfg);
    return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg)
{
    const TrainerConfig& t = cfg.trainer;
    return {
        {"config_version", config_version},
        {"iterations", cfg.iterations},
        {"agents", cfg.agents},
        {"library_size", cfg.library_size},
        {"seed", cfg.seed},
        {"generator", generator_name(cfg.generator)},
        {"ablation", ablation_name(cfg.ablation)},
        {"resampling_enabled", cfg.resampling_enabled},
        {"temperature", cfg.pipeline.temperature},
        {"max_attempts", cfg.pipeline.max_attempts},
        {"selection_weights", cfg.weights()},
        {"incontext_program", cfg.incontext()},
        {"trainer",
         {{"candidates", t.candidates},
          {"generations", t.generations},
          {"budget", t.budget},
          {"elite_fraction", t.elite_fraction},
          {"min_spread", t.min_spread},
          {"ladder", t.ladder}}},
        {"initial_policy", cfg.initial_policy},
        {"remote",
         {{"url", cfg.remote.url},
          {"model", cfg.remote.model},
          {"max_retries", cfg.remote.max_retries},
          {"backoff_ms", cfg.remote.backoff_ms},
          {"timeout_s", cfg.remote.timeout_s},
          {"in_flight", cfg.remote.in_flight}}},
    };
}

std::string config_hash(const RunConfig& cfg)
{
    std::uint32_t h = 2166136261u;
    for (unsigned char c : config_to_json(cfg).dump()) {
        h ^= c;
        h *= 16777619u;
    }
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", h);
    return buf;
}

void to_json(nlohmann::json& j, const RunConfig& cfg) { j = config_to_json(cfg); }

void from_json(const nlohmann::json& j, RunConfig& cfg) { cfg = config_from_json(j); }

} // namespace terraverse
