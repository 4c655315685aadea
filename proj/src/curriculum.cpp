#include <terraverse/curriculum.hpp>
#include <terraverse/error.hpp>

#include <algorithm>

namespace terraverse {

void LadderConfig::validate() const
{
    if (!(g_demote >= 0.0 && g_demote < g_promote && g_promote <= 8.0))
        throw ConfigError("ladder thresholds must satisfy 0 <= g_demote < g_promote <= 8");
    if (!(p_stay >= 0.0 && p_stay <= 1.0))
        throw ConfigError("p_stay must lie in [0, 1]");
    if (levels < 2)
        throw ConfigError("ladder needs at least 2 levels");
}

CurriculumState update(const CurriculumState& st, double goals_reached, Rng& rng, const LadderConfig& cfg)
{
    CurriculumState next = st;
    next.history.push_back({st.level, goals_reached});
    if (goals_reached >= cfg.g_promote) {
        next.level = std::min(st.level + 1, cfg.levels);
    }
    else if (goals_reached < cfg.g_demote) {
        next.level = std::max(st.level - 1, 1);
    }
    else if (st.level > 1 && uniform01(rng) >= cfg.p_stay) {
        next.level = uniform_int(rng, 1, st.level - 1);
    }
    return next;
}

double level_to_difficulty(int k, int levels)
{
    k = std::clamp(k, 1, levels);
    return static_cast<double>(k - 1) / static_cast<double>(levels - 1);
}

void to_json(nlohmann::json& j, const CurriculumState& st)
{
    j = nlohmann::json::object();
    j["level"] = st.level;
    j["history"] = nlohmann::json::array();
    for (const auto& h : st.history)
        j["history"].push_back({h.level, h.goals_reached});
}

void to_json(nlohmann::json& j, const LadderConfig& cfg)
{
    j = {{"g_promote", cfg.g_promote}, {"g_demote", cfg.g_demote}, {"p_stay", cfg.p_stay}, {"levels", cfg.levels}};
}

void from_json(const nlohmann::json& j, LadderConfig& cfg)
{
    cfg.g_promote = j.value("g_promote", cfg.g_promote);
    cfg.g_demote = j.value("g_demote", cfg.g_demote);
    cfg.p_stay = j.value("p_stay", cfg.p_stay);
    cfg.levels = j.value("levels", cfg.levels);
}

} // namespace terraverse
