#pragma once

#include <terraverse/compiler.hpp>
#include <terraverse/dsl.hpp>
#include <terraverse/rng.hpp>
#include <terraverse/trainer.hpp>
#include <terraverse/validator.hpp>

#include <json.hpp>

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace terraverse {

// ---------------------------------------------------------------------------
// Requests and prompts

struct FeedbackBundle {
    TerrainStats terrain_stats;
    EpisodeSummary train_before;
    EpisodeSummary train_after;
    std::vector<std::string> library_docs;
};

enum class RequestKind { initial, evolve };

struct GeneratorRequest {
    RequestKind kind = RequestKind::initial;
    std::string incontext_program;
    std::optional<std::string> parent_program; // evolve only
    std::optional<FeedbackBundle> feedback;    // evolve only, absent under no_feedback
    bool no_feedback = false;                  // ask for a harder variant instead
    std::vector<std::string> previous_docs;    // sequential diversity conditioning
    double temperature = 1.0;
    int max_attempts = 3;

    /// Throws std::invalid_argument when an evolve request lacks its parent or feedback.
    void validate() const;
};

struct ChatMessage {
    std::string role; // system, user, assistant
    std::string content;
    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Instruction used in place of the feedback section for the no-feedback ablation.
extern const char* const harder_instruction;

std::vector<ChatMessage> build_prompt(const GeneratorRequest& req);

/// Contents of the first ``` fenced block, or nullopt when there is none.
std::optional<std::string> extract_fenced_block(std::string_view text);

/// Built-in in-context example (not part of the benchmark).
const std::string& default_incontext_program();

// ---------------------------------------------------------------------------
// Generators

struct GenerationResult {
    std::string text;
    nlohmann::json transcript; // messages, raw responses, retries
};

class EnvironmentGenerator {
public:
    virtual ~EnvironmentGenerator() = default;
    virtual std::string name() const = 0;
    /// Returns DSL source; validity is the caller's concern.
    virtual GenerationResult generate(const GeneratorRequest& req, Rng& rng) = 0;
    /// Upper bound on concurrent generate() calls.
    virtual int max_in_flight() const { return 1; }
};

/// Parameter ranges the mock generator stays inside, so its programs pass
/// the environment check at every difficulty.
struct MockBounds {
    double box_height_max = 0.75;
    double gap_length_max = 0.95;
    double ramp_height_max = 1.0;
    double step_height_max = 0.4;
    double beam_width_min = 0.15;
    double beam_width_max = 0.7;
    double beam_height_max = 0.3;
};

enum class MockMode { standard, random_baseline };

/// Quadruped bounding box used to size random-baseline obstacles.
inline constexpr double robot_length = 0.645;
inline constexpr double robot_width = 0.28;
inline constexpr double robot_height = 0.40;

TerrainProgram mock_generate(Rng& rng, const GridConfig& grid = {});
/// Same as mock_generate, preferring obstacle kinds absent from `previous_docs`.
TerrainProgram mock_generate_diverse(Rng& rng, const std::vector<std::string>& previous_docs,
                                     const GridConfig& grid = {});
/// Randomly placed boxes and ramps sized in [0.5, 2] x the robot bounding box.
TerrainProgram random_generate(Rng& rng, const GridConfig& grid = {});

enum class MutationDirection { harder, easier, random };

/// harder if goals_after >= 6.4, easier if < 3.2, random otherwise; harder without feedback.
MutationDirection mutation_direction(const std::optional<FeedbackBundle>& feedback);

TerrainProgram mock_mutate(const TerrainProgram& parent, const std::optional<FeedbackBundle>& feedback, Rng& rng,
                           const GridConfig& grid = {});

class MockGenerator : public EnvironmentGenerator {
public:
    explicit MockGenerator(MockMode mode = MockMode::standard, GridConfig grid = {}) : mode_(mode), grid_(grid) {}
    std::string name() const override;
    GenerationResult generate(const GeneratorRequest& req, Rng& rng) override;

private:
    MockMode mode_;
    GridConfig grid_;
};

struct RemoteConfig {
    std::string url = "http://127.0.0.1:8000/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string api_key;          // TERRAVERSE_API_KEY when empty
    int max_retries = 5;          // transport errors and 5xx, per attempt
    int backoff_ms = 500;         // doubles every retry
    int timeout_s = 120;
    int in_flight = 4;
};

struct RemoteLog {
    int retries = 0;
    int attempts = 0;
    nlohmann::json exchanges = nlohmann::json::array();
};

/// POSTs the chat request, extracts the first fenced block, and re-prompts with
/// the parse error appended while the text fails to parse.
std::string remote_generate(const RemoteConfig& cfg, std::vector<ChatMessage> messages, double temperature,
                            int max_attempts, Rng& rng, RemoteLog* log = nullptr);

class RemoteGenerator : public EnvironmentGenerator {
public:
    explicit RemoteGenerator(RemoteConfig cfg) : cfg_(std::move(cfg)) {}
    std::string name() const override { return "remote"; }
    GenerationResult generate(const GeneratorRequest& req, Rng& rng) override;
    int max_in_flight() const override { return cfg_.in_flight; }

private:
    RemoteConfig cfg_;
};

// ---------------------------------------------------------------------------
// Admission pipeline

struct PipelineConfig {
    GridConfig grid;
    CheckLimits limits;
    FixConfig fix;
    double temperature = 1.0;
    int max_attempts = 3;
};

struct GenerationStats {
    int requested = 0;
    int responses = 0;       // texts returned by the generator
    int parse_failures = 0;
    int passed_check = 0;    // passed without fixing
    int passed_after_fix = 0;
    int fallbacks = 0;       // slots filled by the mock generator
    int unchanged = 0;       // evolve responses identical to the parent

    double pass_rate() const { return responses ? static_cast<double>(passed_check) / responses : 0.0; }
    GenerationStats& operator+=(const GenerationStats& o);
};

struct AdmittedProgram {
    TerrainProgram program;
    nlohmann::json transcript;
};

/// True when the program passes the check at every ladder difficulty after auto-fixing.
bool admissible(const TerrainProgram& p, const PipelineConfig& cfg);

/// `count` admitted programs, one independent slot each (seeded from `seed`).
std::vector<AdmittedProgram> generate_initial(EnvironmentGenerator& gen, const std::string& incontext, int count,
                                              std::uint64_t seed, const PipelineConfig& cfg,
                                              GenerationStats* stats = nullptr);

/// Programs generated one after another, each conditioned on the docs of all earlier ones.
std::vector<AdmittedProgram> generate_sequential(EnvironmentGenerator& gen, const std::string& incontext, int count,
                                                 std::uint64_t seed, const PipelineConfig& cfg,
                                                 GenerationStats* stats = nullptr);

/// Generator failures in a row across slots; generation aborts once `limit` is reached.
struct FailureStreak {
    explicit FailureStreak(int limit_) : limit(limit_) {}
    std::atomic<int> count{0};
    int limit;
};

/// One admitted variation of `parent`. Without feedback the request asks for a
/// harder terrain instead (no-feedback ablation).
AdmittedProgram evolve_env(EnvironmentGenerator& gen, const TerrainProgram& parent,
                           const std::optional<FeedbackBundle>& feedback, const std::string& incontext, Rng& rng,
                           const PipelineConfig& cfg, GenerationStats* stats = nullptr,
                           FailureStreak* streak = nullptr);

void to_json(nlohmann::json& j, const ChatMessage& m);
void to_json(nlohmann::json& j, const FeedbackBundle& f);
void to_json(nlohmann::json& j, const GenerationStats& s);

} // namespace terraverse
