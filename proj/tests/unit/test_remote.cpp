#include "../support/stub_server.hpp"

#include <terraverse/error.hpp>
#include <terraverse/generation.hpp>

#include <doctest.h>

#include <atomic>
#include <cstdlib>

using namespace terraverse;
using oracle::Reply;
using oracle::StubServer;

namespace {

const std::string valid_program = R"(terrain "stub" {
  param d: 0..1
  platform { length: 2.0, height: 0.0 }
  box { length: 0.6, height: 0.1 + 0.2 * d }
  platform { length: 3.0, height: 0.0 }
  goals auto
})";

const std::string tower_program = R"(terrain "tower" {
  platform { length: 2.0, height: 0.0 }
  box { length: 1.0, height: 4.0 }
  goals auto
})";

std::string fenced(const std::string& s) { return "```terrain\n" + s + "\n```"; }

std::vector<ChatMessage> hello() { return {{"system", "sys"}, {"user", "write a terrain"}}; }

} // namespace

TEST_CASE("request shape and bearer auth")
{
    StubServer stub([](int, const nlohmann::json&) { return Reply{200, fenced(valid_program)}; });
    Rng rng(0);
    RemoteLog log;
    const auto text = remote_generate(stub.config(), hello(), 0.7, 3, rng, &log);
    CHECK(parse_program(text).name == "stub");
    REQUIRE(stub.calls() == 1);
    const auto body = stub.body(0);
    CHECK(body.at("model") == "gpt-4o");
    CHECK(body.at("temperature") == 0.7);
    REQUIRE(body.at("messages").size() == 2);
    CHECK(body.at("messages")[0].at("role") == "system");
    CHECK(body.at("messages")[1].at("content") == "write a terrain");
    CHECK(stub.auth(0) == "Bearer test-key");
    CHECK(log.attempts == 1);
    CHECK(log.retries == 0);
    CHECK(log.exchanges.size() == 1);
}

TEST_CASE("api key falls back to the environment")
{
    StubServer stub([](int, const nlohmann::json&) { return Reply{200, fenced(valid_program)}; });
    auto cfg = stub.config();
    cfg.api_key.clear();
    ::setenv("TERRAVERSE_API_KEY", "env-key", 1);
    Rng rng(0);
    remote_generate(cfg, hello(), 1.0, 1, rng);
    ::unsetenv("TERRAVERSE_API_KEY");
    remote_generate(cfg, hello(), 1.0, 1, rng);
    CHECK(stub.auth(0) == "Bearer env-key");
    CHECK(stub.auth(1).empty());
}

TEST_CASE("prose before the fence is dropped")
{
    StubServer stub([](int, const nlohmann::json&) {
        return Reply{200, "Here is a harder course.\n\n" + fenced(valid_program) + "\nEnjoy."};
    });
    Rng rng(0);
    const auto text = remote_generate(stub.config(), hello(), 1.0, 1, rng);
    CHECK(text == valid_program + "\n");
}

TEST_CASE("server errors are retried with backoff")
{
    StubServer stub([](int call, const nlohmann::json&) {
        return call < 2 ? Reply{500, ""} : Reply{200, fenced(valid_program)};
    });
    Rng rng(0);
    RemoteLog log;
    CHECK_NOTHROW(remote_generate(stub.config(), hello(), 1.0, 3, rng, &log));
    CHECK(log.retries == 2);
    CHECK(log.attempts == 1);
    CHECK(stub.calls() == 3);
}

TEST_CASE("persistent server errors exhaust the generator")
{
    StubServer stub([](int, const nlohmann::json&) { return Reply{503, ""}; });
    auto cfg = stub.config();
    cfg.max_retries = 2;
    Rng rng(0);
    CHECK_THROWS_AS(remote_generate(cfg, hello(), 1.0, 3, rng), GeneratorExhausted);
    CHECK(stub.calls() == 3);
}

TEST_CASE("rejected credentials fail fast")
{
    for (int status : {401, 403}) {
        StubServer stub([status](int, const nlohmann::json&) { return Reply{status, ""}; });
        Rng rng(0);
        CHECK_THROWS_AS(remote_generate(stub.config(), hello(), 1.0, 3, rng), AuthError);
        CHECK(stub.calls() == 1);
    }
}

TEST_CASE("parse failures re-prompt with the error")
{
    StubServer stub([](int call, const nlohmann::json&) {
        return call == 0 ? Reply{200, fenced("terrain \"x\" { platform { length: 2 }")} : Reply{200, fenced(valid_program)};
    });
    Rng rng(0);
    RemoteLog log;
    remote_generate(stub.config(), hello(), 1.0, 3, rng, &log);
    CHECK(log.attempts == 2);
    REQUIRE(stub.calls() == 2);
    const auto msgs = stub.body(1).at("messages");
    REQUIRE(msgs.size() == 4);
    CHECK(msgs[2].at("role") == "assistant");
    CHECK(msgs[3].at("role") == "user");
    CHECK(msgs[3].at("content").get<std::string>().find("failed to parse") != std::string::npos);
    CHECK(log.exchanges[0].at("parsed") == false);
}

TEST_CASE("unparseable replies exhaust the attempts")
{
    StubServer stub([](int, const nlohmann::json&) { return Reply{200, "I cannot help with that."}; });
    Rng rng(0);
    CHECK_THROWS_AS(remote_generate(stub.config(), hello(), 1.0, 3, rng), GeneratorExhausted);
    CHECK(stub.calls() == 3);
}

TEST_CASE("transcripts keep request bodies but not credentials")
{
    StubServer stub([](int, const nlohmann::json&) { return Reply{200, fenced(valid_program)}; });
    RemoteGenerator gen(stub.config());
    GeneratorRequest req;
    req.incontext_program = default_incontext_program();
    Rng rng(0);
    const auto res = gen.generate(req, rng);
    const std::string dumped = res.transcript.dump();
    CHECK(dumped.find("test-key") == std::string::npos);
    CHECK(dumped.find("Authorization") == std::string::npos);
    CHECK(res.transcript.at("exchanges").size() == 1);
    CHECK(res.transcript.at("exchanges")[0].at("request").at("model") == "gpt-4o");
    CHECK(res.transcript.at("generator") == "remote");
}

TEST_CASE("pipeline fills every slot when 40% of replies are invalid")
{
    std::atomic<int> counter{0};
    StubServer stub([&](int, const nlohmann::json&) {
        const int n = counter.fetch_add(1);
        return Reply{200, fenced(n % 5 < 2 ? tower_program : valid_program)};
    });
    RemoteGenerator gen(stub.config());
    PipelineConfig cfg;
    cfg.max_attempts = 10;
    GenerationStats stats;
    const auto out = generate_initial(gen, default_incontext_program(), 30, 0, cfg, &stats);
    CHECK(out.size() == 30);
    for (const auto& a : out)
        CHECK(a.program.name == "stub");
    CHECK(stats.fallbacks == 0);
    CHECK(stats.pass_rate() == doctest::Approx(0.6).epsilon(0.1));
}

TEST_CASE("echoed parent is admitted and flagged unchanged")
{
    StubServer stub([](int, const nlohmann::json&) { return Reply{200, fenced(valid_program)}; });
    RemoteGenerator gen(stub.config());
    FeedbackBundle fb;
    fb.train_after.goals = 5;
    Rng rng(0);
    GenerationStats stats;
    const auto out = evolve_env(gen, parse_program(valid_program), fb, default_incontext_program(), rng,
                                PipelineConfig{}, &stats);
    CHECK(out.program == parse_program(valid_program));
    CHECK(out.transcript.at("attempts").back().at("unchanged") == true);
    CHECK(stats.unchanged == 1);
}
