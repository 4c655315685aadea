#include <terraverse/curriculum.hpp>
#include <terraverse/error.hpp>

#include <doctest.h>

#include <array>
#include <cmath>

using namespace terraverse;

namespace {

CurriculumState at(int level) { return CurriculumState{level, {}}; }

} // namespace

TEST_CASE("promotion and demotion thresholds")
{
    Rng rng(0);
    CHECK(update(at(5), 7, rng).level == 6);
    CHECK(update(at(5), 8, rng).level == 6);
    CHECK(update(at(5), 6.4, rng).level == 6);
    CHECK(update(at(5), 3, rng).level == 4);
    CHECK(update(at(5), 0, rng).level == 4);
    CHECK(update(at(10), 8, rng).level == 10);
    CHECK(update(at(1), 0, rng).level == 1);
    for (int i = 0; i < 100; ++i) {
        const int l = update(at(5), 3.2, rng).level;
        CHECK(l >= 1);
        CHECK(l <= 5);
    }
}

TEST_CASE("middle band stays with probability p_stay")
{
    Rng rng(12345);
    const int trials = 10000;
    std::array<int, 11> hits{};
    for (int i = 0; i < trials; ++i)
        ++hits[update(at(5), 5, rng).level];
    CHECK(std::abs(static_cast<double>(hits[5]) / trials - 0.75) <= 0.02);
    for (int l = 1; l <= 4; ++l)
        CHECK(std::abs(static_cast<double>(hits[l]) / trials - 0.0625) <= 0.015);
    for (int l = 6; l <= 10; ++l)
        CHECK(hits[l] == 0);
}

TEST_CASE("middle band at level 1 stays")
{
    Rng rng(1);
    for (int i = 0; i < 200; ++i)
        CHECK(update(at(1), 5, rng).level == 1);
}

TEST_CASE("ladder climbs and falls in bounded time")
{
    Rng rng(2);
    CurriculumState s = at(1);
    for (int i = 0; i < 9; ++i) {
        CHECK(s.level < 10);
        s = update(s, 8, rng);
    }
    CHECK(s.level == 10);
    CHECK(s.history.size() == 9);
    CHECK(s.history.front() == LadderStep{1, 8});
    for (int start = 1; start <= 10; ++start) {
        CurriculumState d = at(start);
        for (int i = 0; i < 9; ++i)
            d = update(d, 0, rng);
        CHECK(d.level == 1);
    }
}

TEST_CASE("levels stay in bounds under arbitrary updates")
{
    Rng rng(3);
    CurriculumState s = at(1);
    for (int i = 0; i < 5000; ++i) {
        s = update(s, uniform_int(rng, 0, 8), rng);
        REQUIRE(s.level >= 1);
        REQUIRE(s.level <= 10);
    }
}

TEST_CASE("level to difficulty")
{
    CHECK(level_to_difficulty(1) == 0.0);
    CHECK(level_to_difficulty(10) == 1.0);
    CHECK(level_to_difficulty(5) == doctest::Approx(4.0 / 9.0));
}

TEST_CASE("ladder config")
{
    const LadderConfig cfg;
    CHECK(cfg.g_promote == doctest::Approx(6.4));
    CHECK(cfg.g_demote == doctest::Approx(3.2));
    CHECK(cfg.p_stay == 0.75);
    CHECK_NOTHROW(cfg.validate());
    LadderConfig bad = cfg;
    bad.g_demote = 7.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.p_stay = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.g_promote = 9;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    LadderConfig custom;
    custom.g_promote = 8;
    custom.g_demote = 1;
    custom.p_stay = 1.0;
    Rng rng(0);
    CHECK(update(at(5), 7, rng, custom).level == 5);
    CHECK(update(at(5), 0.5, rng, custom).level == 4);

    const nlohmann::json j = cfg;
    CHECK(j.get<LadderConfig>().p_stay == 0.75);
    const nlohmann::json sj = update(at(2), 8, rng);
    CHECK(sj.at("level") == 3);
    CHECK(sj.at("history").size() == 1);
}
