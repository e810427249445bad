#include <atomic>
#include <thread>

#include "doctest.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include "dealbench/agents.hpp"

using namespace dealbench;
using namespace dealbench::agents;
using nlohmann::json;

namespace {

std::string completion_body(const std::string& content) {
    json j{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
    return j.dump();
}

struct StubServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit StubServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }

    AgentEndpoint endpoint() const {
        AgentEndpoint ep;
        ep.base_url = "http://127.0.0.1:" + std::to_string(port);
        ep.model_name = "stub-model";
        ep.timeout_s = 5.0;
        ep.max_retries = 3;
        return ep;
    }
};

BackoffPolicy fast_backoff() {
    BackoffPolicy b;
    b.base_ms = 1;
    b.jitter = false;
    return b;
}

const std::vector<ChatMessage> kHistory{{ChatMessage::Role::system, "sys"},
                                        {ChatMessage::Role::user, "hi"}};

}  // namespace

TEST_CASE("chat_complete returns the first choice's content") {
    std::atomic<int> hits{0};
    StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        const json body = json::parse(req.body);
        CHECK(body.at("model") == "stub-model");
        CHECK(body.at("messages").size() == 2);
        CHECK(body.at("messages")[0].at("role") == "system");
        res.set_content(completion_body("Hello"), "application/json");
    });
    ChatClient client(stub.endpoint(), fast_backoff());
    CHECK(client.complete(kHistory) == "Hello");
    CHECK(hits.load() == 1);
    CHECK(client.last_retry_count() == 0);
}

TEST_CASE("transient 5xx responses are retried with success after two failures") {
    std::atomic<int> hits{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        const int n = ++hits;
        if (n <= 2) {
            res.status = 500;
            res.set_content("boom", "text/plain");
        } else {
            res.set_content(completion_body("ok"), "application/json");
        }
    });
    ChatClient client(stub.endpoint(), fast_backoff());
    CHECK(client.complete(kHistory) == "ok");
    CHECK(hits.load() == 3);
    CHECK(client.last_retry_count() == 2);
}

TEST_CASE("rate limiting surfaces as RateLimited after retries are exhausted") {
    std::atomic<int> hits{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 429;
    });
    auto ep = stub.endpoint();
    ep.max_retries = 1;
    ChatClient client(ep, fast_backoff());
    CHECK_THROWS_AS(client.complete(kHistory), RateLimited);
    CHECK(hits.load() == 2);
}

TEST_CASE("missing API key env fails before any network call") {
    std::atomic<int> hits{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content(completion_body("never"), "application/json");
    });
    auto ep = stub.endpoint();
    ep.api_key_env = "DEALBENCH_TEST_DEFINITELY_UNSET_KEY";
    ChatClient client(ep, fast_backoff());
    CHECK_THROWS_AS(client.complete(kHistory), AuthError);
    CHECK(hits.load() == 0);
}

TEST_CASE("HTTP 401 raises AuthError without retries") {
    std::atomic<int> hits{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
    });
    ChatClient client(stub.endpoint(), fast_backoff());
    CHECK_THROWS_AS(client.complete(kHistory), AuthError);
    CHECK(hits.load() == 1);
}

TEST_CASE("empty completion content is an error") {
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion_body("  \n"), "application/json");
    });
    ChatClient client(stub.endpoint(), fast_backoff());
    CHECK_THROWS_AS(client.complete(kHistory), EmptyCompletion);
}

TEST_CASE("history must start with exactly one system message") {
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion_body("x"), "application/json");
    });
    ChatClient client(stub.endpoint(), fast_backoff());
    CHECK_THROWS_AS(client.complete({}), AgentError);
    CHECK_THROWS_AS(client.complete({{ChatMessage::Role::user, "hi"}}), AgentError);
    CHECK_THROWS_AS(client.complete({{ChatMessage::Role::system, "a"},
                                     {ChatMessage::Role::system, "b"}}),
                    AgentError);
}

TEST_CASE("unreachable endpoints raise TransportError after retries") {
    AgentEndpoint ep;
    ep.base_url = "http://127.0.0.1:9";  // discard port, nothing listens
    ep.model_name = "stub";
    ep.timeout_s = 0.2;
    ep.max_retries = 1;
    ChatClient client(ep, fast_backoff());
    CHECK_THROWS_AS(client.complete(kHistory), TransportError);
    CHECK(client.last_retry_count() == 1);
}

TEST_CASE("wire sink records request/response pairs when tracing") {
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion_body("traced"), "application/json");
    });
    std::vector<std::string> wire;
    ChatClient client(stub.endpoint(), fast_backoff(), nullptr,
                      [&](const std::string& line) { wire.push_back(line); });
    CHECK(client.complete(kHistory) == "traced");
    REQUIRE(wire.size() == 1);
    const json record = json::parse(wire[0]);
    CHECK(record.at("status") == 200);
    CHECK(record.at("request").at("model") == "stub-model");
}
