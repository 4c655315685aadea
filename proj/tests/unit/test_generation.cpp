#include "../support/oracles.hpp"

#include <terraverse/coevolution.hpp>
#include <terraverse/generation.hpp>

#include <doctest.h>

#include <array>
#include <cmath>

using namespace terraverse;

namespace {

const TerrainProgram gap_course = parse_program(R"(terrain "gap_course" {
  param d: 0..1
  platform { length: 2.0, height: 0.0 }
  gap { length: 0.2 + 0.6 * d, depth: 0.6 }
  platform { length: 3.0, height: 0.0 }
  goals auto
})");

FeedbackBundle feedback_with(double goals_after)
{
    FeedbackBundle f;
    f.terrain_stats = terrain_stats(compile(gap_course, 0.5));
    f.train_before = {goals_after / 2, 120.0, 3.0};
    f.train_after = {goals_after, 150.0, 1.0};
    return f;
}

double gap_length(const TerrainProgram& p, double d)
{
    for (const auto& s : p.segments)
        if (s.kind == SegmentKind::gap)
            return s.param("length").eval(d);
    return 0.0;
}

GeneratorRequest evolve_request(std::optional<FeedbackBundle> fb, bool no_feedback = false)
{
    GeneratorRequest r;
    r.kind = RequestKind::evolve;
    r.incontext_program = default_incontext_program();
    r.parent_program = format_program(gap_course);
    r.feedback = std::move(fb);
    r.no_feedback = no_feedback;
    return r;
}

std::string all_text(const std::vector<ChatMessage>& msgs)
{
    std::string s;
    for (const auto& m : msgs)
        s += m.content + "\n";
    return s;
}

} // namespace

TEST_CASE("mock generation is deterministic per seed")
{
    Rng a(7), b(7);
    CHECK(mock_generate(a) == mock_generate(b));
    Rng c(7), d(8);
    CHECK(format_program(mock_generate(c)) != format_program(mock_generate(d)));
    MockGenerator gen;
    Rng e(7), f(7);
    GeneratorRequest req;
    req.incontext_program = default_incontext_program();
    CHECK(gen.generate(req, e).text == gen.generate(req, f).text);
}

TEST_CASE("mock programs pass the program check")
{
    Rng rng(2024);
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto p = mock_generate(rng);
        if (!check_program(p).passed)
            ++failures;
        CHECK_NOTHROW(validate_program(p));
    }
    CHECK(failures == 0);
    std::vector<std::string> docs{"box", "gap", "ramp"};
    for (int i = 0; i < 100; ++i)
        CHECK(check_program(mock_generate_diverse(rng, docs)).passed);
}

TEST_CASE("random baseline obstacles stay within half to double the robot box")
{
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_generate(rng);
        CHECK(check_program(p).passed);
        int obstacles = 0;
        for (const auto& s : p.segments) {
            if (s.kind == SegmentKind::platform)
                continue;
            ++obstacles;
            REQUIRE((s.kind == SegmentKind::box || s.kind == SegmentKind::ramp));
            const double len = s.param("length").eval(0.0);
            const double wid = s.param("width").eval(0.0);
            const double hgt = s.param(s.kind == SegmentKind::box ? "height" : "end_height").eval(0.0);
            CHECK(len >= 0.5 * 0.645 - 1e-4);
            CHECK(len <= 2.0 * 0.645 + 1e-4);
            CHECK(wid >= 0.5 * 0.28 - 1e-4);
            CHECK(wid <= 2.0 * 0.28 + 1e-4);
            CHECK(hgt >= 0.5 * 0.40 - 1e-4);
            CHECK(hgt <= 2.0 * 0.40 + 1e-4);
            // no difficulty dependence
            CHECK(s.param("length").eval(1.0) == len);
        }
        CHECK(obstacles >= 1);
    }
}

TEST_CASE("mutation direction follows the feedback")
{
    CHECK(mutation_direction(std::nullopt) == MutationDirection::harder);
    CHECK(mutation_direction(feedback_with(8)) == MutationDirection::harder);
    CHECK(mutation_direction(feedback_with(6.4)) == MutationDirection::harder);
    CHECK(mutation_direction(feedback_with(5)) == MutationDirection::random);
    CHECK(mutation_direction(feedback_with(3.2)) == MutationDirection::random);
    CHECK(mutation_direction(feedback_with(0)) == MutationDirection::easier);
}

TEST_CASE("mastered gap course mutates harder")
{
    REQUIRE(check_program(gap_course).passed);
    Rng rng(10);
    int coefficient_changes = 0;
    for (int i = 0; i < 100; ++i) {
        const auto child = mock_mutate(gap_course, feedback_with(8), rng);
        CHECK(check_program(child).passed);
        if (child.segments.size() > gap_course.segments.size()) {
            CHECK(gap_length(child, 0) == gap_length(gap_course, 0));
            CHECK(gap_length(child, 1) == gap_length(gap_course, 1));
            continue;
        }
        REQUIRE(child.segments.size() == gap_course.segments.size());
        ++coefficient_changes;
        CHECK(gap_length(child, 0) >= gap_length(gap_course, 0));
        CHECK(gap_length(child, 1) >= gap_length(gap_course, 1));
        CHECK(gap_length(child, 0) + gap_length(child, 1) > gap_length(gap_course, 0) + gap_length(gap_course, 1));
    }
    CHECK(coefficient_changes > 50);
}

TEST_CASE("failed gap course mutates easier")
{
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto child = mock_mutate(gap_course, feedback_with(0), rng);
        CHECK(child.segments.size() <= gap_course.segments.size());
        CHECK(gap_length(child, 0) <= gap_length(gap_course, 0));
        CHECK(gap_length(child, 1) <= gap_length(gap_course, 1));
        CHECK(gap_length(child, 0) + gap_length(child, 1) < gap_length(gap_course, 0) + gap_length(gap_course, 1));
    }
}

TEST_CASE("mock generator evolves the parent it is given")
{
    MockGenerator gen;
    Rng rng(12);
    const auto res = gen.generate(evolve_request(feedback_with(8)), rng);
    const auto child = parse_program(res.text);
    CHECK(child != gap_course);
    CHECK(child.name == gap_course.name);
    CHECK(res.transcript.at("generator") == "mock");
}

TEST_CASE("prompt structure")
{
    GeneratorRequest init;
    init.incontext_program = default_incontext_program();
    const auto msgs = build_prompt(init);
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].role == "system");
    CHECK(msgs[1].content.find(default_incontext_program()) != std::string::npos);
    CHECK(build_prompt(init) == msgs);

    const auto evolve = build_prompt(evolve_request(feedback_with(5)));
    const auto text = all_text(evolve);
    for (const char* label : {"max_height", "max_consecutive_diff", "height_std", "goals_before", "goals_after",
                              "steps_before", "steps_after", "edge_violations_before", "edge_violations_after"})
        CHECK(text.find(std::string(label) + ": ") != std::string::npos);
    CHECK(text.find("goals_after: 5") != std::string::npos);
    bool parent_as_reply = false;
    for (const auto& m : evolve)
        if (m.role == "assistant" && m.content.find("gap_course") != std::string::npos)
            parent_as_reply = true;
    CHECK(parent_as_reply);
    CHECK(text.find(harder_instruction) == std::string::npos);

    const auto blind = all_text(build_prompt(evolve_request(std::nullopt, true)));
    CHECK(blind.find(harder_instruction) != std::string::npos);
    CHECK(blind.find("goals_after") == std::string::npos);

    GeneratorRequest bad = evolve_request(std::nullopt);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.no_feedback = true;
    CHECK_NOTHROW(bad.validate());
    bad.parent_program.reset();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("fenced block extraction")
{
    CHECK(extract_fenced_block("```\nabc\n```") == "abc\n");
    CHECK(extract_fenced_block("Sure, here it is:\n```terrain\nx\n```\ntrailing ```y```") == "x\n");
    CHECK(!extract_fenced_block("no fence here").has_value());
    CHECK(!extract_fenced_block("```\nunterminated").has_value());
}

TEST_CASE("initial generation")
{
    MockGenerator gen;
    const PipelineConfig cfg;
    GenerationStats stats;
    const auto a = generate_initial(gen, default_incontext_program(), 80, 0, cfg, &stats);
    const auto b = generate_initial(gen, default_incontext_program(), 80, 0, cfg);
    REQUIRE(a.size() == 80);
    REQUIRE(b.size() == 80);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].program == b[i].program);
        CHECK(admissible(a[i].program, cfg));
    }
    CHECK(stats.requested == 80);
    CHECK(stats.passed_check == 80);
    CHECK(stats.fallbacks == 0);
    CHECK(generate_initial(gen, default_incontext_program(), 0, 0, cfg).empty());

    const auto seq = generate_sequential(gen, default_incontext_program(), 5, 1, cfg);
    CHECK(seq.size() == 5);
}

TEST_CASE("evolve_env flags unchanged variations")
{
    struct Echo : EnvironmentGenerator {
        std::string name() const override { return "echo"; }
        GenerationResult generate(const GeneratorRequest& req, Rng&) override
        {
            return {*req.parent_program, nlohmann::json::object()};
        }
    } echo;
    Rng rng(0);
    GenerationStats stats;
    const auto out = evolve_env(echo, gap_course, feedback_with(8), default_incontext_program(), rng,
                                PipelineConfig{}, &stats);
    CHECK(out.program == gap_course);
    CHECK(out.transcript.at("outcome") == "passed");
    CHECK(out.transcript.at("attempts").back().at("unchanged") == true);
    CHECK(stats.unchanged == 1);
}

TEST_CASE("learning-progress resampling")
{
    std::vector<LearningProgress> h(2);
    h[0].goals_after = 0.9;
    h[1].goals_after = 0.1;
    Rng rng(5);
    const auto picks = resample_by_learning_progress(h, 10000, rng);
    REQUIRE(picks.size() == 10000);
    const double first = static_cast<double>(std::count(picks.begin(), picks.end(), 0u)) / 10000;
    CHECK(std::abs(first - 0.9) <= 0.015);

    std::vector<LearningProgress> eq(4);
    for (auto& e : eq)
        e.goals_before = 1, e.goals_after = 3;
    std::array<int, 4> hits{};
    for (auto i : resample_by_learning_progress(eq, 8000, rng))
        ++hits[i];
    for (int n : hits)
        CHECK(std::abs(n / 8000.0 - 0.25) <= 0.02);

    std::vector<LearningProgress> neg(2);
    neg[0].goals_before = 5, neg[0].goals_after = 1;
    neg[1].goals_after = 0.99;
    const auto np = resample_by_learning_progress(neg, 10000, rng);
    const double share = static_cast<double>(std::count(np.begin(), np.end(), 0u)) / 10000;
    CHECK(std::abs(share - 0.01) <= 0.005);
    CHECK(resample_by_learning_progress({}, 5, rng).empty());
}
