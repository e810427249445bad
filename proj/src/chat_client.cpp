#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include "dealbench/agents.hpp"

namespace dealbench::agents {

namespace {

using nlohmann::json;

double jitter_factor() {
    thread_local std::mt19937 rng(std::random_device{}());
    return 0.5 + static_cast<double>(rng()) / (static_cast<double>(rng.max()) + 1.0);
}

}  // namespace

std::string to_string(ChatMessage::Role role) {
    switch (role) {
        case ChatMessage::Role::system: return "system";
        case ChatMessage::Role::user: return "user";
        case ChatMessage::Role::assistant: break;
    }
    return "assistant";
}

RateLimiter::RateLimiter(double requests_per_minute)
    : per_minute_(requests_per_minute),
      tokens_(requests_per_minute > 0 ? std::max(1.0, requests_per_minute / 60.0) : 0),
      last_refill_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (per_minute_ <= 0) return;
    for (;;) {
        double wait_s = 0;
        {
            std::lock_guard lock(mu_);
            const auto now = std::chrono::steady_clock::now();
            const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
            last_refill_ = now;
            tokens_ = std::min(per_minute_, tokens_ + elapsed * per_minute_ / 60.0);
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            wait_s = (1.0 - tokens_) * 60.0 / per_minute_;
        }
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    }
}

ChatClient::ChatClient(AgentEndpoint endpoint, BackoffPolicy backoff, RateLimiter* limiter,
                       WireSink wire_sink)
    : endpoint_(std::move(endpoint)),
      backoff_(backoff),
      limiter_(limiter),
      wire_sink_(std::move(wire_sink)) {
    if (endpoint_.max_retries > 5) endpoint_.max_retries = 5;
    if (endpoint_.timeout_s <= 0) throw AgentError("endpoint timeout must be positive");
}

std::string ChatClient::complete(const std::vector<ChatMessage>& history) {
    if (history.empty() || history.front().role != ChatMessage::Role::system)
        throw AgentError("chat history must start with a system message");
    for (std::size_t i = 1; i < history.size(); ++i)
        if (history[i].role == ChatMessage::Role::system)
            throw AgentError("chat history must contain exactly one system message");

    std::string api_key;
    if (!endpoint_.api_key_env.empty()) {
        const char* value = std::getenv(endpoint_.api_key_env.c_str());
        if (value == nullptr || *value == '\0')
            throw AuthError("API key environment variable not set: " + endpoint_.api_key_env);
        api_key = value;
    }

    json body;
    body["model"] = endpoint_.model_name;
    body["messages"] = json::array();
    for (const auto& m : history)
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    if (endpoint_.temperature >= 0) body["temperature"] = endpoint_.temperature;
    const std::string payload = body.dump();

    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(std::chrono::duration<double>(endpoint_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(endpoint_.timeout_s));
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    last_retries_ = 0;
    bool last_was_rate_limit = false;
    std::string last_error;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            ++last_retries_;
            double delay_ms = backoff_.base_ms * std::pow(backoff_.factor, attempt - 1);
            if (backoff_.jitter) delay_ms *= jitter_factor();
            std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay_ms));
        }
        if (limiter_ != nullptr) limiter_->acquire();

        auto result = client.Post(endpoint_.path, headers, payload, "application/json");

        if (wire_sink_) {
            json wire{{"attempt", attempt},
                      {"base_url", endpoint_.base_url},
                      {"path", endpoint_.path},
                      {"model", endpoint_.model_name},
                      {"request", body},
                      {"status", result ? result->status : -1},
                      {"response", result ? result->body : httplib::to_string(result.error())}};
            wire_sink_(wire.dump());
        }

        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            last_was_rate_limit = false;
            continue;  // transient, retry
        }
        const int status = result->status;
        if (status == 401 || status == 403)
            throw AuthError("authentication rejected (HTTP " + std::to_string(status) + ")");
        if (status == 429) {
            last_error = "rate limited (HTTP 429)";
            last_was_rate_limit = true;
            continue;
        }
        if (status >= 500) {
            last_error = "server error (HTTP " + std::to_string(status) + ")";
            last_was_rate_limit = false;
            continue;
        }
        if (status != 200)
            throw TransportError("unexpected HTTP status " + std::to_string(status) + ": " +
                                 result->body);

        json response;
        try {
            response = json::parse(result->body);
        } catch (const json::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
        if (!response.contains("choices") || !response["choices"].is_array() ||
            response["choices"].empty())
            throw TransportError("completion response has no choices");
        const auto& message = response["choices"][0]["message"];
        if (!message.contains("content") || !message["content"].is_string())
            throw TransportError("completion response has no message content");
        const std::string content = message["content"].get<std::string>();
        if (content.find_first_not_of(" \t\r\n") == std::string::npos)
            throw EmptyCompletion("completion content is empty");
        return content;
    }

    if (last_was_rate_limit) throw RateLimited(last_error + " after " + std::to_string(last_retries_) + " retries");
    throw TransportError(last_error + " after " + std::to_string(last_retries_) + " retries");
}

}  // namespace dealbench::agents
