#include "../support/oracles.hpp"

#include <terraverse/error.hpp>

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace terraverse;

namespace {

TerrainProgram prog(const std::string& body)
{
    return parse_program("terrain \"t\" {\n param d: 0..1\n" + body + "\n goals auto }");
}

} // namespace

TEST_CASE("m_to_idx floors with a representation tolerance")
{
    CHECK(m_to_idx(1.5, 0.1) == 15);
    CHECK(m_to_idx(0.0, 0.1) == 0);
    CHECK(m_to_idx(1.57, 0.1) == 15);
    CHECK(m_to_idx(0.3, 0.1) == 3);
    CHECK(m_to_idx(0.7, 0.1) == 7);
    CHECK(m_to_idx(0.0999, 0.1) == 0);
}

TEST_CASE("grid dimensions")
{
    const GridConfig g;
    CHECK(g.rows() == 180);
    CHECK(g.cols() == 40);
    const GridConfig small{2.0, 1.0, 0.05};
    CHECK(small.rows() == 40);
    CHECK(small.cols() == 20);
}

TEST_CASE("flat course")
{
    const auto t = compile(prog("platform { length: 18.0, height: 0.0 }"), 0.5);
    CHECK(t.rows() == 180);
    CHECK(t.cols() == 40);
    for (double h : t.heights())
        CHECK(h == 0.0);
    REQUIRE(t.goals.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(t.goals[i].y == 2.0);
        if (i)
            CHECK(t.goals[i].x > t.goals[i - 1].x);
    }
    CHECK(t.difficulty == 0.5);
    CHECK(t.source_name == "t");
}

TEST_CASE("gap footprint")
{
    const auto t = compile(prog("platform { length: 2, height: 0 }\n gap { length: 0.5, depth: 0.8 }\n"
                                "platform { length: 15.5, height: 0 }"),
                           1.0);
    for (int r = 0; r < t.rows(); ++r)
        for (int c = 0; c < t.cols(); ++c)
            CHECK(t.at(r, c) == (r >= 20 && r <= 24 ? -0.8 : 0.0));
}

TEST_CASE("ramp heights follow the linear profile")
{
    const auto t = compile(prog("platform { length: 2, height: 0 }\n ramp { length: 4, start_height: 0, end_height: 1.0 }"),
                           0.0);
    const double x0 = 2.0;
    const double half_cell_slope = 0.5 * 0.1 * (1.0 / 4.0);
    for (int k = 20; k < 60; ++k) {
        const double exact = (k * 0.1 - x0) / 4.0;
        CHECK(std::abs(t.at(k, 20) - exact) <= half_cell_slope + 1e-12);
        const double centre = ((k + 0.5) * 0.1 - x0) / 4.0;
        CHECK(std::abs(t.at(k, 20) - centre) <= half_cell_slope + 1e-12);
    }
    CHECK(t.at(60, 20) == 0.0);
}

TEST_CASE("stairs, beams and poles")
{
    const auto stairs = compile(prog("platform { length: 1, height: 0 }\n"
                                     "stairs { steps: 3, step_length: 0.5, step_height: 0.1, base_height: 0.2 }"),
                                0.0);
    CHECK(stairs.at(10, 5) == doctest::Approx(0.3));
    CHECK(stairs.at(15, 5) == doctest::Approx(0.4));
    CHECK(stairs.at(24, 5) == doctest::Approx(0.5));
    CHECK(stairs.at(25, 5) == 0.0);

    const auto beam = compile(prog("platform { length: 1, height: 0 }\n beam { length: 1, height: 0.2, width: 0.4 }"),
                              0.0);
    int on = 0;
    for (int c = 0; c < beam.cols(); ++c) {
        const double h = beam.at(12, c);
        CHECK((h == 0.2 || h == beam_fall_depth));
        on += h == 0.2;
    }
    CHECK(on == 4);

    const auto poles = compile(prog("platform { length: 1, height: 0 }\n"
                                    "poles { count: 2, spacing: 1.0, pole_width: 0.2, lateral_offset: 0.5 }"),
                               0.0);
    CHECK(poles.at(15, 25) == pole_height);
    CHECK(poles.at(25, 15) == pole_height);
    CHECK(poles.at(15, 15) == 0.0);
    CHECK(poles.at(25, 25) == 0.0);
}

TEST_CASE("explicit goals are evaluated at d")
{
    const auto p = parse_program(oracle::read_file(std::filesystem::path(TERRAVERSE_CORPUS_DIR) / "explicit_goals.terrain"));
    const auto t = compile(p, 1.0);
    REQUIRE(t.goals.size() == 8);
    CHECK(t.goals[3].x == doctest::Approx(2.8));
    CHECK(t.goals[6].y == doctest::Approx(2.5));
}

TEST_CASE("compile errors")
{
    CHECK_THROWS_AS(compile(prog("platform { length: 19, height: 0 }"), 0.0), CompileError);
    CHECK_THROWS_AS(compile(prog("platform { length: 10 + 10 * d, height: 0 }"), 1.0), CompileError);
    CHECK_NOTHROW(compile(prog("platform { length: 10 + 10 * d, height: 0 }"), 0.0));
    CHECK_THROWS_AS(compile(prog("platform { length: 1 / d, height: 0 }"), 0.0), EvalError);
    CHECK_THROWS_AS(compile(prog("platform { length: 1, height: 0 }"), 1.5), EvalError);
    CHECK_THROWS_AS(compile(prog("platform { length: 1, height: 0 }\n gap { length: 1, depth: -0.3 }"), 0.0),
                    CompileError);
    CHECK_THROWS_AS(compile(prog("platform { length: 1, height: 0 }\n"
                                 "stairs { steps: 0.2, step_length: 0.3, step_height: 0.1 }"),
                            0.0),
                    CompileError);
}

TEST_CASE("compile matches the per-cell oracle on random programs")
{
    Rng rng(2024);
    for (int i = 0; i < 60; ++i) {
        const auto p = oracle::random_program(rng);
        for (double d : {0.0, 0.5, 1.0}) {
            CAPTURE(format_program(p));
            CAPTURE(d);
            const auto got = compile(p, d);
            const auto want = oracle::compile_per_cell(p, d);
            CHECK(got.heights() == want.heights());
            CHECK(got.goals == want.goals);
            CHECK(got.spawn == want.spawn);
        }
    }
}

TEST_CASE("compile matches the per-cell oracle on the corpus and on a coarse grid")
{
    const GridConfig coarse{18.0, 4.0, 0.25};
    for (const auto& f : oracle::corpus_files()) {
        const auto p = parse_program(oracle::read_file(f));
        for (double d : {0.0, 1.0 / 3.0, 1.0}) {
            CAPTURE(f.filename().string());
            CHECK(compile(p, d).heights() == oracle::compile_per_cell(p, d).heights());
            CHECK(compile(p, d, coarse).heights() == oracle::compile_per_cell(p, d, coarse).heights());
        }
    }
}

TEST_CASE("compile is deterministic and always yields 8 goals")
{
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto p = oracle::random_program(rng);
        const auto a = compile(p, 0.3);
        CHECK(a == compile(p, 0.3));
        CHECK(a.goals.size() == 8);
    }
}

TEST_CASE("terrain stats")
{
    const auto flat = compile(prog("platform { length: 18, height: 0 }"), 0.0);
    const auto s = terrain_stats(flat);
    CHECK(s.max_height == 0.0);
    CHECK(s.max_consecutive_diff == 0.0);
    CHECK(s.height_std == 0.0);
    CHECK(s.max_goal_step == 0.0);

    const auto box = compile(prog("platform { length: 2, height: 0 }\n box { length: 1, height: 0.5 }\n"
                                  "platform { length: 2, height: 0 }"),
                             0.0);
    CHECK(terrain_stats(box).max_height == 0.5);
    CHECK(terrain_stats(box).max_consecutive_diff == 0.5);

    for (const auto& f : oracle::corpus_files()) {
        const auto t = compile(parse_program(oracle::read_file(f)), 0.7);
        const auto got = terrain_stats(t);
        const auto want = oracle::naive_stats(t);
        CAPTURE(f.filename().string());
        CHECK(got.max_height == want.max_height);
        CHECK(got.max_consecutive_diff == want.max_diff);
        CHECK(got.height_std == doctest::Approx(want.stddev).epsilon(1e-12));
        CHECK(got.max_goal_step == want.max_goal_step);
    }
}

TEST_CASE("exports")
{
    const auto t = compile(prog("platform { length: 2, height: 0 }\n gap { length: 0.5, depth: 0.8 }\n"
                                "platform { length: 2, height: 0.25 }"),
                           0.0);
    std::ostringstream csv;
    write_heights_csv(t, csv);
    std::istringstream lines(csv.str());
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        if (rows == 22)
            CHECK(line.substr(0, 8) == "-0.8000,");
        if (rows == 30)
            CHECK(line.substr(0, 7) == "0.2500,");
        CHECK(std::count(line.begin(), line.end(), ',') == 39);
        ++rows;
    }
    CHECK(rows == 180);

    std::ostringstream pgm;
    write_heights_pgm(t, pgm);
    std::istringstream in(pgm.str());
    std::string magic, comment;
    std::getline(in, magic);
    std::getline(in, comment);
    CHECK(magic == "P2");
    CHECK(comment.rfind("# height_m = value * ", 0) == 0);
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    CHECK(w == 180);
    CHECK(h == 40);
    CHECK(maxval == 65535);
    int v = 0, lo = 70000, hi = -1, n = 0;
    while (in >> v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++n;
    }
    CHECK(n == 180 * 40);
    CHECK(lo == 0);
    CHECK(hi == 65535);

    std::ostringstream goals;
    write_goals_csv(t, goals);
    CHECK(goals.str().rfind("idx,x_m,y_m\n1,", 0) == 0);
    const std::string goal_text = goals.str();
    CHECK(std::count(goal_text.begin(), goal_text.end(), '\n') == 9);
}
