#include <terraverse/generation.hpp>

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace terraverse {

const char* const harder_instruction =
    "Make this terrain more challenging. Write a harder variation of the terrain above, "
    "keeping it within the course bounds.";

namespace {

constexpr const char* system_text = R"txt(You design training terrains for a quadruped robot learning parkour.
A terrain is a program in a small declarative language. The course is 18 m long (x, forward)
and 4 m wide (y, centerline at y = 2.0). Segments are laid out one after another along x,
starting at x = 0. Every numeric field is an arithmetic expression of the difficulty d in [0, 1];
level 1 of the training ladder uses d = 0 and level 10 uses d = 1, so write parameters that
grow harder with d.

Grammar:
  program   := "terrain" STRING "{" doc? param? segment+ goals "}"
  doc       := "doc" STRING
  param     := "param" "d" ":" "0..1"
  segment   := KIND "{" field ("," field)* "}"
  field     := IDENT ":" expr
  goals     := "goals" ("auto" | "[" goal ("," goal)* "]")
  goal      := "(" expr "," expr ")"
  expr      := term (("+"|"-") term)* ; term := factor (("*"|"/") factor)*
  factor    := NUMBER | "d" | "(" expr ")" | ("min"|"max"|"round") "(" expr ("," expr)? ")"
  "#" starts a comment that runs to the end of the line.

Segment kinds and fields (lengths and heights in meters):
  platform { length, height }            flat ground
  gap      { length, depth }             pit of the given depth
  ramp     { length, start_height, end_height }   optional: bank (height gained across y)
  stairs   { steps, step_length, step_height }    optional: base_height
  box      { length, height }            raised block
  beam     { length, height, width }     narrow walkway; everything beside it drops to -1 m
  poles    { count, spacing, pole_width } 1.5 m square columns, alternating +-lateral_offset
All kinds except beam also accept optional width and lateral_offset; beam accepts lateral_offset.

Rules:
  - The first segment must be a platform; the robot spawns on it.
  - The whole course must fit in 18 m at every difficulty.
  - There are exactly 8 goals. "goals auto" places them at segment centers on the centerline;
    explicit goals are (x, y) points in meters.
  - Terrain heights must stay below 3 m and neighbouring goals must differ in height by less than 0.8 m.

Output format: reply with exactly one program inside a single fenced code block (```terrain ... ```).
Give the program a short doc string that describes the terrain.)txt";

std::string fenced(const std::string& program) { return "```terrain\n" + program + (program.ends_with('\n') ? "" : "\n") + "```"; }

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

} // namespace

void GeneratorRequest::validate() const
{
    if (kind == RequestKind::evolve) {
        if (!parent_program)
            throw std::invalid_argument("evolve request without a parent program");
        if (!feedback && !no_feedback)
            throw std::invalid_argument("evolve request without feedback");
    }
    if (max_attempts < 1)
        throw std::invalid_argument("max_attempts must be at least 1");
}

std::vector<ChatMessage> build_prompt(const GeneratorRequest& req)
{
    req.validate();
    std::vector<ChatMessage> messages;
    messages.push_back({"system", system_text});

    std::ostringstream example;
    example << "Here is an example terrain program:\n\n" << fenced(req.incontext_program) << "\n\n";
    if (req.kind == RequestKind::initial) {
        if (!req.previous_docs.empty()) {
            example << "Terrains written so far:\n";
            for (const auto& doc : req.previous_docs)
                example << "- " << doc << "\n";
            example << "\nWrite a new terrain program that trains a skill none of these terrains cover.";
        }
        else {
            example << "Write a new terrain program with different obstacles.";
        }
        messages.push_back({"user", example.str()});
        return messages;
    }

    example << "Write a new terrain program with different obstacles.";
    messages.push_back({"user", example.str()});
    messages.push_back({"assistant", fenced(*req.parent_program)});

    if (req.no_feedback) {
        messages.push_back({"user", harder_instruction});
        return messages;
    }

    const FeedbackBundle& f = *req.feedback;
    std::ostringstream fb;
    fb << "A policy was trained on the terrain above. Terrain statistics at its training difficulty:\n"
       << "max_height: " << num(f.terrain_stats.max_height) << "\n"
       << "max_consecutive_diff: " << num(f.terrain_stats.max_consecutive_diff) << "\n"
       << "height_std: " << num(f.terrain_stats.height_std) << "\n"
       << "\nPolicy statistics on this terrain, averaged over the 10 difficulty levels (8 goals per episode):\n"
       << "goals_before: " << num(f.train_before.goals) << "\n"
       << "goals_after: " << num(f.train_after.goals) << "\n"
       << "steps_before: " << num(f.train_before.steps) << "\n"
       << "steps_after: " << num(f.train_after.steps) << "\n"
       << "edge_violations_before: " << num(f.train_before.edge_violations) << "\n"
       << "edge_violations_after: " << num(f.train_after.edge_violations) << "\n";
    if (!f.library_docs.empty()) {
        fb << "\nTerrains the policy is currently training on:\n";
        for (const auto& doc : f.library_docs)
            fb << "- " << doc << "\n";
    }
    fb << "\nWrite a variation of this terrain. If the policy reaches most goals, make it harder; "
          "if it reaches few, make it easier, so that the terrain stays just beyond what the policy can do.";
    messages.push_back({"user", fb.str()});
    return messages;
}

std::optional<std::string> extract_fenced_block(std::string_view text)
{
    const auto open = text.find("```");
    if (open == std::string_view::npos)
        return std::nullopt;
    // skip the info string on the opening fence line
    auto body = text.find('\n', open + 3);
    if (body == std::string_view::npos)
        return std::nullopt;
    ++body;
    const auto close = text.find("```", body);
    if (close == std::string_view::npos)
        return std::nullopt;
    return std::string(text.substr(body, close - body));
}

const std::string& default_incontext_program()
{
    static const std::string text = R"(terrain "step_and_gap" {
  doc "A low box to climb, a short gap to jump and a gentle ramp up and down."
  param d: 0..1
  platform { length: 2.0, height: 0.0 }
  box { length: 0.8, height: 0.05 + 0.25 * d }
  platform { length: 1.2, height: 0.0 }
  gap { length: 0.1 + 0.3 * d, depth: 0.5 }
  platform { length: 1.2, height: 0.0 }
  ramp { length: 1.5, start_height: 0.0, end_height: 0.05 + 0.3 * d }
  ramp { length: 1.5, start_height: 0.05 + 0.3 * d, end_height: 0.0 }
  platform { length: 1.5, height: 0.0 }
  # goals past the gap move with its length
  goals [(1.0, 2.0), (2.4, 2.0), (3.4, 2.0), (4.7 + 0.3 * d, 2.0), (6.05 + 0.3 * d, 2.0),
         (6.8 + 0.3 * d, 2.0), (8.6 + 0.3 * d, 2.0), (9.5 + 0.3 * d, 2.0)]
}
)";
    return text;
}

void to_json(nlohmann::json& j, const ChatMessage& m) { j = {{"role", m.role}, {"content", m.content}}; }

void to_json(nlohmann::json& j, const FeedbackBundle& f)
{
    j = {{"max_height", f.terrain_stats.max_height},
         {"max_consecutive_diff", f.terrain_stats.max_consecutive_diff},
         {"height_std", f.terrain_stats.height_std},
         {"train_before", f.train_before},
         {"train_after", f.train_after},
         {"library_docs", f.library_docs}};
}

} // namespace terraverse
