#include <terraverse/error.hpp>
#include <terraverse/generation.hpp>

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace terraverse {

namespace {

struct Endpoint {
    std::string base; // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url)
{
    const auto scheme = url.find("://");
    const auto host_start = scheme == std::string::npos ? 0 : scheme + 3;
    const auto slash = url.find('/', host_start);
    if (slash == std::string::npos)
        return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

std::string api_key(const RemoteConfig& cfg)
{
    if (!cfg.api_key.empty())
        return cfg.api_key;
    const char* env = std::getenv("TERRAVERSE_API_KEY");
    return env ? env : "";
}

/// One chat completion, retrying transport errors and 5xx with exponential backoff.
std::string post_chat(const RemoteConfig& cfg, const nlohmann::json& body, Rng& rng, RemoteLog& log)
{
    const Endpoint ep = split_url(cfg.url);
    httplib::Client client(ep.base);
    client.set_connection_timeout(cfg.timeout_s, 0);
    client.set_read_timeout(cfg.timeout_s, 0);
    client.set_write_timeout(cfg.timeout_s, 0);
    httplib::Headers headers;
    if (const std::string key = api_key(cfg); !key.empty())
        headers.emplace("Authorization", "Bearer " + key);
    const std::string payload = body.dump();

    for (int retry = 0;; ++retry) {
        const auto res = client.Post(ep.path, headers, payload, "application/json");
        std::string failure;
        if (!res) {
            failure = "transport error: " + httplib::to_string(res.error());
        }
        else if (res->status == 401 || res->status == 403) {
            throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        }
        else if (res->status >= 500) {
            failure = "HTTP " + std::to_string(res->status);
        }
        else if (res->status != 200) {
            throw GeneratorExhausted("endpoint returned HTTP " + std::to_string(res->status));
        }
        else {
            try {
                const auto reply = nlohmann::json::parse(res->body);
                return reply.at("choices").at(0).at("message").at("content").get<std::string>();
            }
            catch (const nlohmann::json::exception& e) {
                throw GeneratorExhausted(std::string("malformed chat completion: ") + e.what());
            }
        }
        if (retry >= cfg.max_retries)
            throw GeneratorExhausted("endpoint unavailable after " + std::to_string(retry) + " retries (" + failure + ")");
        ++log.retries;
        // jitter keeps concurrent slots from retrying in lockstep
        const double delay = cfg.backoff_ms * std::pow(2.0, retry) * (1.0 + 0.1 * uniform01(rng));
        std::this_thread::sleep_for(std::chrono::microseconds(static_cast<long long>(delay * 1000.0)));
    }
}

} // namespace

std::string remote_generate(const RemoteConfig& cfg, std::vector<ChatMessage> messages, double temperature,
                            int max_attempts, Rng& rng, RemoteLog* log)
{
    RemoteLog local;
    RemoteLog& lg = log ? *log : local;
    std::string last_error = "no attempts";
    for (int attempt = 0; attempt < std::max(1, max_attempts); ++attempt) {
        ++lg.attempts;
        nlohmann::json body = {{"model", cfg.model}, {"messages", messages}, {"temperature", temperature}};
        const std::string content = post_chat(cfg, body, rng, lg);
        const std::string text = extract_fenced_block(content).value_or(content);
        nlohmann::json exchange = {{"request", body}, {"response", content}};
        try {
            parse_program(text);
            exchange["parsed"] = true;
            lg.exchanges.push_back(std::move(exchange));
            return text;
        }
        catch (const Error& e) {
            last_error = e.what();
            exchange["parsed"] = false;
            exchange["error"] = last_error;
            lg.exchanges.push_back(std::move(exchange));
            messages.push_back({"assistant", content});
            messages.push_back({"user", "That program failed to parse: " + last_error
                                            + "\nReply with a corrected program in a single fenced code block."});
        }
    }
    throw GeneratorExhausted("no parseable program after " + std::to_string(max_attempts) + " attempts: " + last_error);
}

GenerationResult RemoteGenerator::generate(const GeneratorRequest& req, Rng& rng)
{
    RemoteLog log;
    GenerationResult out;
    const auto messages = build_prompt(req);
    nlohmann::json transcript = {{"generator", name()}, {"model", cfg_.model}, {"messages", messages}};
    out.text = remote_generate(cfg_, messages, req.temperature, req.max_attempts, rng, &log);
    transcript["exchanges"] = log.exchanges;
    transcript["retries"] = log.retries;
    transcript["attempts"] = log.attempts;
    transcript["response"] = out.text;
    out.transcript = std::move(transcript);
    return out;
}

} // namespace terraverse
