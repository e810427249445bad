#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dealbench/agents.hpp"
#include "dealbench/catalog.hpp"
#include "dealbench/money.hpp"
#include "dealbench/prompts.hpp"

namespace dealbench::engine {

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IllegalState : EngineError {
    using EngineError::EngineError;
};
struct ProtocolError : EngineError {
    using EngineError::EngineError;
};

// ---------------------------------------------------------------------------
// Episode configuration and record types
// ---------------------------------------------------------------------------

struct NegotiationConfig {
    catalog::Product product;
    Money budget;
    catalog::BudgetLevel budget_level = catalog::BudgetLevel::retail;
    int t_max = 30;
    bool record_wire = false;
    std::string run_id;
    int trial = 0;
    std::uint64_t seed = 0;
};

enum class Speaker { buyer, seller };
std::string to_string(Speaker s);

struct Turn {
    int round = 1;  // 1-based; the buyer's opening greeting is round 1
    Speaker speaker = Speaker::buyer;
    std::string text;
    std::optional<Money> extracted_price;  // analyst output for seller turns,
                                           // informational extraction for buyer turns
};

struct OutcomeFlags {
    bool over_budget = false;
    bool below_wholesale = false;
    bool over_retail = false;
};

struct Outcome {
    enum class FinalDecision { accept, reject };
    FinalDecision decision = FinalDecision::reject;
    std::optional<Money> final_price;
    int rounds_used = 0;
    bool deadlock = false;
    bool downgraded_accept = false;  // buyer accepted before any seller offer existed
    std::vector<std::pair<int, Money>> trajectory;  // every extracted seller offer
    OutcomeFlags flags;
};

std::string to_string(Outcome::FinalDecision d);

struct Transcript {
    std::string run_id;
    std::string buyer_id;
    std::string seller_id;
    std::string product_name;
    catalog::Category category = catalog::Category::other;
    Money retail_price;
    Money wholesale_price;
    Money beta;
    catalog::BudgetLevel budget_level = catalog::BudgetLevel::retail;
    int trial = 0;
    std::uint64_t seed = 0;
    int t_max = 30;
    std::vector<Turn> turns;
    std::optional<Outcome> outcome;  // absent on aborted episodes
    std::string status = "completed";  // completed | aborted
    std::string abort_reason;
    std::int64_t started_ms = 0;
    std::int64_t finished_ms = 0;
};

std::string transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const std::string& line);

// ---------------------------------------------------------------------------
// Participant interfaces
// ---------------------------------------------------------------------------

struct NegotiatorView {
    Speaker role = Speaker::buyer;
    const catalog::Product* product = nullptr;
    Money private_limit;                  // budget (buyer) or wholesale price (seller)
    std::optional<Money> opponent_offer;  // opponent's last extracted offer
    int own_message_count = 0;
    const std::vector<Turn>* history = nullptr;
};

class Negotiator {
public:
    virtual ~Negotiator() = default;
    virtual std::string id() const = 0;
    virtual std::string next_message(const NegotiatorView& view) = 0;
};

class Judge {
public:
    virtual ~Judge() = default;
    virtual agents::Decision decide(const std::string& buyer_message,
                                    const std::optional<std::string>& seller_message) = 0;
};

class Analyst {
public:
    virtual ~Analyst() = default;
    virtual std::optional<Money> extract(const std::string& seller_message) = 0;
};

/// Millisecond clock; swap in a logical clock for reproducible transcripts.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
};

class SystemClock : public Clock {
public:
    std::int64_t now_ms() override;
};

class LogicalClock : public Clock {
public:
    explicit LogicalClock(std::int64_t start = 0) : next_(start) {}
    std::int64_t now_ms() override { return next_++; }

private:
    std::int64_t next_;
};

// ---------------------------------------------------------------------------
// Built-in participants
// ---------------------------------------------------------------------------

class ScriptedNegotiator : public Negotiator {
public:
    ScriptedNegotiator(std::string id, double open_ratio, double step_ratio)
        : id_(std::move(id)), open_ratio_(open_ratio), step_ratio_(step_ratio) {}
    std::string id() const override { return id_; }
    std::string next_message(const NegotiatorView& view) override;

private:
    std::string id_;
    double open_ratio_;
    double step_ratio_;
};

class RuleJudge : public Judge {
public:
    agents::Decision decide(const std::string& buyer_message,
                            const std::optional<std::string>& seller_message) override;
};

class RuleAnalyst : public Analyst {
public:
    std::optional<Money> extract(const std::string& seller_message) override;
};

// LLM-backed participants: the buyer sees retail price, features and budget;
// the seller additionally sees the wholesale price and never the budget.
class LlmNegotiator : public Negotiator {
public:
    LlmNegotiator(std::string id, std::shared_ptr<agents::ChatClient> client,
                  const prompts::PromptLibrary& library,
                  std::optional<prompts::StrategyAction> strategy = std::nullopt);
    std::string id() const override { return id_; }
    std::string next_message(const NegotiatorView& view) override;

private:
    std::string id_;
    std::shared_ptr<agents::ChatClient> client_;
    const prompts::PromptLibrary* library_;
    std::optional<prompts::StrategyAction> strategy_;
};

class LlmJudge : public Judge {
public:
    LlmJudge(std::shared_ptr<agents::ChatClient> client, const prompts::PromptLibrary& library)
        : client_(std::move(client)), library_(&library) {}
    agents::Decision decide(const std::string& buyer_message,
                            const std::optional<std::string>& seller_message) override;

private:
    std::shared_ptr<agents::ChatClient> client_;
    const prompts::PromptLibrary* library_;
};

class LlmAnalyst : public Analyst {
public:
    LlmAnalyst(std::shared_ptr<agents::ChatClient> client, const prompts::PromptLibrary& library)
        : client_(std::move(client)), library_(&library) {}
    std::optional<Money> extract(const std::string& seller_message) override;

private:
    std::shared_ptr<agents::ChatClient> client_;
    const prompts::PromptLibrary* library_;
};

// ---------------------------------------------------------------------------
// Episode driver
// ---------------------------------------------------------------------------

// Single-use per episode. Round t: the seller responds, the analyst extracts
// the standing offer from the seller's message, the buyer responds, the judge
// classifies the buyer's intent. ACCEPTANCE closes at the standing offer;
// REJECTION closes without a price; hitting t_max unresolved is a deadlock
// and counts as a rejection.
class Episode {
public:
    Episode(Negotiator& buyer, Negotiator& seller, Judge& judge, Analyst& analyst,
            NegotiationConfig config, Clock* clock = nullptr);

    /// Runs one round; returns false once a terminal state is reached.
    bool step();

    /// Throws IllegalState before termination.
    Outcome finalize() const;

    Transcript run();

    bool terminal() const { return terminal_; }

private:
    void open_with_greeting();
    void record_buyer_turn(const std::string& text);
    void record_seller_turn(const std::string& text);
    NegotiatorView view_for(Speaker role) const;

    Negotiator& buyer_;
    Negotiator& seller_;
    Judge& judge_;
    Analyst& analyst_;
    NegotiationConfig config_;
    Clock* clock_;
    LogicalClock fallback_clock_;

    std::vector<Turn> turns_;
    std::vector<std::pair<int, Money>> trajectory_;
    std::optional<Money> standing_offer_;      // latest seller extraction
    std::optional<Money> last_buyer_offer_;    // informational
    int round_ = 0;
    int buyer_messages_ = 0;
    int seller_messages_ = 0;
    bool terminal_ = false;
    bool greeted_ = false;
    agents::Decision terminal_decision_ = agents::Decision::continue_negotiation;
    bool downgraded_accept_ = false;
};

Transcript run_negotiation(Negotiator& buyer, Negotiator& seller, Judge& judge, Analyst& analyst,
                           const NegotiationConfig& config, Clock* clock = nullptr);

/// Anomaly flags for a terminal outcome: accepted above budget, below
/// wholesale, or above retail.
OutcomeFlags finalize_flags(const Outcome& outcome, const NegotiationConfig& config);

}  // namespace dealbench::engine
