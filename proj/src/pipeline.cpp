#include <terraverse/error.hpp>
#include <terraverse/generation.hpp>
#include <terraverse/parallel.hpp>

#include <atomic>
#include <mutex>

namespace terraverse {

GenerationStats& GenerationStats::operator+=(const GenerationStats& o)
{
    requested += o.requested;
    responses += o.responses;
    parse_failures += o.parse_failures;
    passed_check += o.passed_check;
    passed_after_fix += o.passed_after_fix;
    fallbacks += o.fallbacks;
    unchanged += o.unchanged;
    return *this;
}

void to_json(nlohmann::json& j, const GenerationStats& s)
{
    j = {{"requested", s.requested},
         {"responses", s.responses},
         {"parse_failures", s.parse_failures},
         {"passed_check", s.passed_check},
         {"passed_after_fix", s.passed_after_fix},
         {"fallbacks", s.fallbacks},
         {"unchanged", s.unchanged},
         {"pass_rate", s.pass_rate()}};
}

bool admissible(const TerrainProgram& p, const PipelineConfig& cfg)
{
    return check_program(p, cfg.limits, {}, cfg.grid, &cfg.fix).passed;
}

namespace {

using Fallback = std::function<TerrainProgram(Rng&)>;

AdmittedProgram run_slot(EnvironmentGenerator& gen, const GeneratorRequest& req, Rng& rng, const PipelineConfig& cfg,
                         const Fallback& fallback, FailureStreak& guard, GenerationStats& stats)
{
    ++stats.requested;
    nlohmann::json record = {{"kind", req.kind == RequestKind::initial ? "initial" : "evolve"},
                             {"attempts", nlohmann::json::array()}};
    for (int attempt = 0; attempt < std::max(1, cfg.max_attempts); ++attempt) {
        GenerationResult result;
        try {
            result = gen.generate(req, rng);
            guard.count.store(0);
        }
        catch (const GeneratorExhausted& e) {
            record["attempts"].push_back({{"error", e.what()}});
            if (guard.count.fetch_add(1) + 1 >= guard.limit)
                throw;
            break;
        }
        ++stats.responses;
        nlohmann::json entry = result.transcript;
        TerrainProgram program;
        try {
            program = parse_program(result.text);
        }
        catch (const Error& e) {
            ++stats.parse_failures;
            entry["outcome"] = "parse_error";
            entry["error"] = e.what();
            record["attempts"].push_back(std::move(entry));
            continue;
        }
        std::string outcome;
        if (check_program(program, cfg.limits, {}, cfg.grid).passed) {
            ++stats.passed_check;
            outcome = "passed";
        }
        else if (admissible(program, cfg)) {
            ++stats.passed_after_fix;
            outcome = "passed_after_fix";
        }
        else {
            entry["outcome"] = "rejected";
            entry["report"] = check_program(program, cfg.limits, {}, cfg.grid, &cfg.fix);
            record["attempts"].push_back(std::move(entry));
            continue;
        }
        entry["outcome"] = outcome;
        if (req.parent_program) {
            const bool same = format_program(program) == format_program(parse_program(*req.parent_program));
            entry["unchanged"] = same;
            stats.unchanged += same ? 1 : 0;
        }
        record["attempts"].push_back(std::move(entry));
        record["outcome"] = outcome;
        return {std::move(program), std::move(record)};
    }
    ++stats.fallbacks;
    TerrainProgram program = fallback(rng);
    record["outcome"] = "fallback";
    record["fallback"] = format_program(program);
    return {std::move(program), std::move(record)};
}

void require_valid_incontext(const std::string& incontext, const PipelineConfig& cfg)
{
    TerrainProgram p;
    try {
        p = parse_program(incontext);
    }
    catch (const Error& e) {
        throw ConfigError(std::string("in-context example does not parse: ") + e.what());
    }
    if (!check_program(p, cfg.limits, {}, cfg.grid).passed)
        throw ConfigError("in-context example fails the environment check");
}

GeneratorRequest base_request(const std::string& incontext, const PipelineConfig& cfg)
{
    GeneratorRequest req;
    req.incontext_program = incontext;
    req.temperature = cfg.temperature;
    req.max_attempts = cfg.max_attempts;
    return req;
}

} // namespace

std::vector<AdmittedProgram> generate_initial(EnvironmentGenerator& gen, const std::string& incontext, int count,
                                              std::uint64_t seed, const PipelineConfig& cfg, GenerationStats* stats)
{
    if (count <= 0)
        return {};
    require_valid_incontext(incontext, cfg);
    const GeneratorRequest req = base_request(incontext, cfg);
    FailureStreak guard(std::max(1, cfg.max_attempts));
    std::vector<AdmittedProgram> out(count);
    std::vector<GenerationStats> slot_stats(count);
    const Fallback fallback = [&cfg](Rng& rng) { return mock_generate(rng, cfg.grid); };
    parallel_for(static_cast<std::size_t>(count), static_cast<std::size_t>(gen.max_in_flight()), [&](std::size_t i) {
        Rng rng(derive_seed(seed, i));
        out[i] = run_slot(gen, req, rng, cfg, fallback, guard, slot_stats[i]);
    });
    if (stats)
        for (const auto& s : slot_stats)
            *stats += s;
    return out;
}

std::vector<AdmittedProgram> generate_sequential(EnvironmentGenerator& gen, const std::string& incontext, int count,
                                                 std::uint64_t seed, const PipelineConfig& cfg, GenerationStats* stats)
{
    if (count <= 0)
        return {};
    require_valid_incontext(incontext, cfg);
    GeneratorRequest req = base_request(incontext, cfg);
    FailureStreak guard(std::max(1, cfg.max_attempts));
    GenerationStats local;
    std::vector<AdmittedProgram> out;
    const Fallback fallback = [&cfg](Rng& rng) { return mock_generate(rng, cfg.grid); };
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        out.push_back(run_slot(gen, req, rng, cfg, fallback, guard, local));
        req.previous_docs.push_back(out.back().program.doc);
    }
    if (stats)
        *stats += local;
    return out;
}

AdmittedProgram evolve_env(EnvironmentGenerator& gen, const TerrainProgram& parent,
                           const std::optional<FeedbackBundle>& feedback, const std::string& incontext, Rng& rng,
                           const PipelineConfig& cfg, GenerationStats* stats, FailureStreak* streak)
{
    GeneratorRequest req = base_request(incontext, cfg);
    req.kind = RequestKind::evolve;
    req.parent_program = format_program(parent);
    req.no_feedback = !feedback.has_value();
    req.feedback = feedback;
    FailureStreak own(std::max(1, cfg.max_attempts));
    FailureStreak& guard = streak ? *streak : own;
    GenerationStats local;
    const Fallback fallback = [&](Rng& r) { return mock_mutate(parent, feedback, r, cfg.grid); };
    AdmittedProgram result;
    try {
        result = run_slot(gen, req, rng, cfg, fallback, guard, local);
    }
    catch (const GeneratorExhausted&) {
        if (stats)
            *stats += local;
        throw;
    }
    if (stats)
        *stats += local;
    return result;
}

} // namespace terraverse
