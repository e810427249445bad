#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dealbench/money.hpp"

namespace dealbench::agents {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct AgentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AuthError : AgentError {
    using AgentError::AgentError;
};
struct RateLimited : AgentError {
    using AgentError::AgentError;
};
struct TransportError : AgentError {
    using AgentError::AgentError;
};
struct EmptyCompletion : AgentError {
    using AgentError::AgentError;
};

// ---------------------------------------------------------------------------
// Chat transport
// ---------------------------------------------------------------------------

struct ChatMessage {
    enum class Role { system, user, assistant };
    Role role;
    std::string content;
};

std::string to_string(ChatMessage::Role role);

struct AgentEndpoint {
    std::string base_url;                         // scheme://host[:port]
    std::string path = "/v1/chat/completions";    // chat-completion route
    std::string model_name;
    std::string api_key_env;                      // empty: unauthenticated endpoint
    double timeout_s = 60.0;
    int max_retries = 3;                          // capped at 5
    double temperature = -1.0;                    // < 0: omit (provider default)
};

struct BackoffPolicy {
    int base_ms = 1000;
    double factor = 2.0;
    bool jitter = true;
};

/// Token bucket shared by concurrent negotiations; 0 = unlimited.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_minute);
    void acquire();

private:
    double per_minute_;
    double tokens_;
    std::chrono::steady_clock::time_point last_refill_;
    std::mutex mu_;
};

using WireSink = std::function<void(const std::string& json_line)>;

/// Chat-completion client: POST {model, messages, temperature}, read the
/// first choice's message content. Transient transport failures and 5xx/429
/// responses are retried with exponential backoff.
class ChatClient {
public:
    explicit ChatClient(AgentEndpoint endpoint, BackoffPolicy backoff = {},
                        RateLimiter* limiter = nullptr, WireSink wire_sink = nullptr);

    std::string complete(const std::vector<ChatMessage>& history);

    int last_retry_count() const { return last_retries_; }
    const AgentEndpoint& endpoint() const { return endpoint_; }

private:
    AgentEndpoint endpoint_;
    BackoffPolicy backoff_;
    RateLimiter* limiter_;
    WireSink wire_sink_;
    int last_retries_ = 0;
};

// ---------------------------------------------------------------------------
// Judge / analyst (rule-based and tolerant LLM post-processing)
// ---------------------------------------------------------------------------

enum class Decision { acceptance, rejection, continue_negotiation };

std::string to_string(Decision d);

// Extracts the seller's main-product offer from free text, ignoring add-on
// amounts (warranty, insurance, gifts, accessories). Returns nullopt when no
// offer is present.
std::optional<Money> extract_price(std::string_view seller_message);

// Keyword classifier over the buyer's latest message: explicit acceptance,
// explicit rejection / walk-away / cannot-afford, otherwise CONTINUE.
Decision classify_decision(std::string_view buyer_message, std::string_view seller_message);

/// Tolerant parse of an LLM judge reply ("ACCEPTANCE", "answer: rejection", ...).
std::optional<Decision> parse_decision_keyword(std::string_view model_output);

/// Tolerant parse of an LLM analyst reply ("$25000", "25000", "Price: $25000", "None").
std::optional<Money> parse_analyst_output(std::string_view model_output);

// ---------------------------------------------------------------------------
// Scripted negotiators (deterministic desk-scale stand-ins for LLM agents)
// ---------------------------------------------------------------------------

struct ScriptedPolicy {
    enum class Role { buyer, seller };
    Role role = Role::buyer;
    double open_ratio = 0.7;   // buyer's opening offer as a fraction of retail
    double step_ratio = 0.05;  // per-turn move as a fraction of retail
    Money floor_or_cap;        // budget for buyers, wholesale price for sellers
};

struct ScriptedView {
    Money retail_price;
    std::string product_name;
    std::optional<Money> opponent_offer;  // opponent's last extracted offer
    int own_message_count = 0;            // messages this party has already sent
};

struct ScriptedStep {
    std::string utterance;
    std::optional<Money> proposed_price;
    Decision intent = Decision::continue_negotiation;
};

// Deterministic concession walk. The buyer opens at open_ratio * retail and
// raises by step_ratio * retail per own turn, capped at its budget; the
// seller opens at retail and lowers by the same step, floored at wholesale.
// Each side accepts once the opponent's standing offer is weakly better than
// its own next planned offer. Prices are embedded as "$<amount>" so the
// rule-based analyst can extract them.
ScriptedStep scripted_step(const ScriptedPolicy& policy, const ScriptedView& view);

}  // namespace dealbench::agents
