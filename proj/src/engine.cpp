#include "dealbench/engine.hpp"

#include <chrono>

#include "json.hpp"

namespace dealbench::engine {

namespace {

using nlohmann::json;

json money_json(const Money& m) { return m.str(); }
Money money_from_json(const json& j) { return Money::parse(j.get<std::string>()); }

}  // namespace

std::string to_string(Speaker s) { return s == Speaker::buyer ? "buyer" : "seller"; }

std::string to_string(Outcome::FinalDecision d) {
    return d == Outcome::FinalDecision::accept ? "accept" : "reject";
}

std::int64_t SystemClock::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------------------
// Built-in participants
// ---------------------------------------------------------------------------

std::string ScriptedNegotiator::next_message(const NegotiatorView& view) {
    agents::ScriptedPolicy policy;
    policy.role = view.role == Speaker::buyer ? agents::ScriptedPolicy::Role::buyer
                                              : agents::ScriptedPolicy::Role::seller;
    policy.open_ratio = open_ratio_;
    policy.step_ratio = step_ratio_;
    policy.floor_or_cap = view.private_limit;

    agents::ScriptedView sv;
    sv.retail_price = view.product->retail_price;
    sv.product_name = view.product->name;
    sv.opponent_offer = view.opponent_offer;
    sv.own_message_count = view.own_message_count;
    return agents::scripted_step(policy, sv).utterance;
}

agents::Decision RuleJudge::decide(const std::string& buyer_message,
                                   const std::optional<std::string>& seller_message) {
    return agents::classify_decision(buyer_message, seller_message.value_or(""));
}

std::optional<Money> RuleAnalyst::extract(const std::string& seller_message) {
    return agents::extract_price(seller_message);
}

LlmNegotiator::LlmNegotiator(std::string id, std::shared_ptr<agents::ChatClient> client,
                             const prompts::PromptLibrary& library,
                             std::optional<prompts::StrategyAction> strategy)
    : id_(std::move(id)), client_(std::move(client)), library_(&library), strategy_(strategy) {}

std::string LlmNegotiator::next_message(const NegotiatorView& view) {
    using agents::ChatMessage;
    std::vector<ChatMessage> history;

    if (view.role == Speaker::buyer && view.own_message_count == 0) {
        // Opening greeting comes from its own system prompt.
        const auto ctx = prompts::greeting_context(*view.product, view.private_limit);
        history.push_back({ChatMessage::Role::system,
                           prompts::render(library_->get(prompts::PromptRole::buyer_greeting), ctx)});
        return client_->complete(history);
    }

    std::string system_body;
    if (view.role == Speaker::buyer) {
        system_body = strategy_ ? library_->strategy_prompt_body(*strategy_)
                                : library_->get(prompts::PromptRole::buyer_system).body;
        const prompts::PromptTemplate tmpl{prompts::PromptRole::buyer_system, system_body};
        history.push_back({ChatMessage::Role::system,
                           prompts::render(tmpl, prompts::buyer_context(*view.product,
                                                                        view.private_limit))});
    } else {
        history.push_back({ChatMessage::Role::system,
                           prompts::render(library_->get(prompts::PromptRole::seller_system),
                                           prompts::seller_context(*view.product))});
    }
    for (const auto& turn : *view.history) {
        const bool own = (turn.speaker == Speaker::buyer) == (view.role == Speaker::buyer);
        history.push_back(
            {own ? ChatMessage::Role::assistant : ChatMessage::Role::user, turn.text});
    }
    return client_->complete(history);
}

agents::Decision LlmJudge::decide(const std::string& buyer_message,
                                  const std::optional<std::string>& seller_message) {
    const auto ctx = prompts::judge_context(
        buyer_message,
        seller_message ? std::optional<std::string_view>(*seller_message) : std::nullopt);
    std::vector<agents::ChatMessage> history{
        {agents::ChatMessage::Role::system,
         prompts::render(library_->get(prompts::PromptRole::judge), ctx)}};
    const std::string reply = client_->complete(history);
    return agents::parse_decision_keyword(reply).value_or(agents::Decision::continue_negotiation);
}

std::optional<Money> LlmAnalyst::extract(const std::string& seller_message) {
    std::vector<agents::ChatMessage> history{
        {agents::ChatMessage::Role::system,
         prompts::render(library_->get(prompts::PromptRole::analyst),
                         prompts::analyst_context(seller_message))}};
    return agents::parse_analyst_output(client_->complete(history));
}

// ---------------------------------------------------------------------------
// Episode driver
// ---------------------------------------------------------------------------

Episode::Episode(Negotiator& buyer, Negotiator& seller, Judge& judge, Analyst& analyst,
                 NegotiationConfig config, Clock* clock)
    : buyer_(buyer),
      seller_(seller),
      judge_(judge),
      analyst_(analyst),
      config_(std::move(config)),
      clock_(clock != nullptr ? clock : &fallback_clock_) {
    if (config_.t_max < 1) throw EngineError("t_max must be >= 1");
}

NegotiatorView Episode::view_for(Speaker role) const {
    NegotiatorView view;
    view.role = role;
    view.product = &config_.product;
    view.private_limit =
        role == Speaker::buyer ? config_.budget : config_.product.wholesale_price;
    view.opponent_offer = role == Speaker::buyer ? standing_offer_ : last_buyer_offer_;
    view.own_message_count = role == Speaker::buyer ? buyer_messages_ : seller_messages_;
    view.history = &turns_;
    return view;
}

void Episode::record_buyer_turn(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ProtocolError("empty buyer utterance in round " + std::to_string(round_));
    Turn turn;
    turn.round = round_ == 0 ? 1 : round_;
    turn.speaker = Speaker::buyer;
    turn.text = text;
    turn.extracted_price = agents::extract_price(text);
    if (turn.extracted_price) last_buyer_offer_ = turn.extracted_price;
    turns_.push_back(std::move(turn));
    ++buyer_messages_;
}

void Episode::record_seller_turn(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ProtocolError("empty seller utterance in round " + std::to_string(round_));
    Turn turn;
    turn.round = round_;
    turn.speaker = Speaker::seller;
    turn.text = text;
    turn.extracted_price = analyst_.extract(text);
    if (turn.extracted_price) {
        standing_offer_ = turn.extracted_price;
        trajectory_.emplace_back(round_, *turn.extracted_price);
    }
    turns_.push_back(std::move(turn));
    ++seller_messages_;
}

void Episode::open_with_greeting() {
    record_buyer_turn(buyer_.next_message(view_for(Speaker::buyer)));
    greeted_ = true;
}

bool Episode::step() {
    if (terminal_) return false;
    if (!greeted_) open_with_greeting();
    ++round_;

    record_seller_turn(seller_.next_message(view_for(Speaker::seller)));
    const std::string& seller_text = turns_.back().text;

    record_buyer_turn(buyer_.next_message(view_for(Speaker::buyer)));
    const std::string& buyer_text = turns_.back().text;

    const agents::Decision decision = judge_.decide(buyer_text, seller_text);
    if (decision == agents::Decision::acceptance) {
        terminal_ = true;
        if (standing_offer_) {
            terminal_decision_ = agents::Decision::acceptance;
        } else {
            // Acceptance with no seller offer on the table cannot set a
            // transaction price; downgrade to a rejection.
            terminal_decision_ = agents::Decision::rejection;
            downgraded_accept_ = true;
        }
    } else if (decision == agents::Decision::rejection) {
        terminal_ = true;
        terminal_decision_ = agents::Decision::rejection;
    } else if (round_ >= config_.t_max) {
        terminal_ = true;  // deadlock: t_max reached without resolution
        terminal_decision_ = agents::Decision::continue_negotiation;
    }
    return !terminal_;
}

Outcome Episode::finalize() const {
    if (!terminal_) throw IllegalState("finalize called before the episode terminated");
    Outcome outcome;
    outcome.rounds_used = round_;
    outcome.trajectory = trajectory_;
    outcome.downgraded_accept = downgraded_accept_;
    if (terminal_decision_ == agents::Decision::acceptance) {
        outcome.decision = Outcome::FinalDecision::accept;
        outcome.final_price = standing_offer_;
    } else {
        outcome.decision = Outcome::FinalDecision::reject;
        outcome.deadlock = terminal_decision_ == agents::Decision::continue_negotiation;
    }
    outcome.flags = finalize_flags(outcome, config_);
    return outcome;
}

Transcript Episode::run() {
    Transcript t;
    t.run_id = config_.run_id;
    t.buyer_id = buyer_.id();
    t.seller_id = seller_.id();
    t.product_name = config_.product.name;
    t.category = config_.product.category;
    t.retail_price = config_.product.retail_price;
    t.wholesale_price = config_.product.wholesale_price;
    t.beta = config_.budget;
    t.budget_level = config_.budget_level;
    t.trial = config_.trial;
    t.seed = config_.seed;
    t.t_max = config_.t_max;
    t.started_ms = clock_->now_ms();
    try {
        while (step()) {
        }
        t.outcome = finalize();
    } catch (const agents::AgentError& e) {
        t.status = "aborted";
        t.abort_reason = e.what();
    } catch (const ProtocolError& e) {
        t.status = "aborted";
        t.abort_reason = e.what();
    }
    t.turns = turns_;
    t.finished_ms = clock_->now_ms();
    return t;
}

Transcript run_negotiation(Negotiator& buyer, Negotiator& seller, Judge& judge, Analyst& analyst,
                           const NegotiationConfig& config, Clock* clock) {
    Episode episode(buyer, seller, judge, analyst, config, clock);
    return episode.run();
}

OutcomeFlags finalize_flags(const Outcome& outcome, const NegotiationConfig& config) {
    OutcomeFlags flags;
    if (outcome.decision == Outcome::FinalDecision::accept && outcome.final_price) {
        flags.over_budget = *outcome.final_price > config.budget;
        flags.below_wholesale = *outcome.final_price < config.product.wholesale_price;
        flags.over_retail = *outcome.final_price > config.product.retail_price;
    }
    return flags;
}

// ---------------------------------------------------------------------------
// Transcript JSONL
// ---------------------------------------------------------------------------

std::string transcript_to_json(const Transcript& t) {
    json j;
    j["run_id"] = t.run_id;
    j["product_name"] = t.product_name;
    j["category"] = catalog::to_string(t.category);
    j["retail_price"] = money_json(t.retail_price);
    j["wholesale_price"] = money_json(t.wholesale_price);
    j["budget_level"] = catalog::to_string(t.budget_level);
    j["beta"] = money_json(t.beta);
    j["buyer_model"] = t.buyer_id;
    j["seller_model"] = t.seller_id;
    j["trial"] = t.trial;
    j["seed"] = t.seed;
    j["t_max"] = t.t_max;
    j["status"] = t.status;
    if (!t.abort_reason.empty()) j["abort_reason"] = t.abort_reason;

    j["turns"] = json::array();
    for (const auto& turn : t.turns) {
        json jt{{"round", turn.round}, {"speaker", to_string(turn.speaker)}, {"text", turn.text}};
        jt["extracted_price"] = turn.extracted_price ? money_json(*turn.extracted_price) : json();
        j["turns"].push_back(std::move(jt));
    }

    if (t.outcome) {
        const Outcome& o = *t.outcome;
        json jo{{"decision", to_string(o.decision)},
                {"rounds_used", o.rounds_used},
                {"deadlock", o.deadlock},
                {"downgraded_accept", o.downgraded_accept}};
        jo["final_price"] = o.final_price ? money_json(*o.final_price) : json();
        jo["trajectory"] = json::array();
        for (const auto& [round, price] : o.trajectory)
            jo["trajectory"].push_back({round, money_json(price)});
        j["outcome"] = std::move(jo);
        j["flags"] = {{"over_budget", o.flags.over_budget},
                      {"below_wholesale", o.flags.below_wholesale},
                      {"over_retail", o.flags.over_retail}};
    } else {
        j["outcome"] = json();
        j["flags"] = {{"over_budget", false}, {"below_wholesale", false}, {"over_retail", false}};
    }
    j["timestamps"] = {{"started_ms", t.started_ms}, {"finished_ms", t.finished_ms}};
    return j.dump();
}

Transcript transcript_from_json(const std::string& line) {
    json j = json::parse(line);
    Transcript t;
    t.run_id = j.at("run_id").get<std::string>();
    t.product_name = j.at("product_name").get<std::string>();
    t.category = catalog::category_from_string(j.value("category", "other"));
    t.retail_price = money_from_json(j.at("retail_price"));
    t.wholesale_price = money_from_json(j.at("wholesale_price"));
    const auto level = catalog::budget_level_from_string(j.at("budget_level").get<std::string>());
    if (!level) throw EngineError("unknown budget level in transcript");
    t.budget_level = *level;
    t.beta = money_from_json(j.at("beta"));
    t.buyer_id = j.at("buyer_model").get<std::string>();
    t.seller_id = j.at("seller_model").get<std::string>();
    t.trial = j.value("trial", 0);
    t.seed = j.value("seed", 0ull);
    t.t_max = j.value("t_max", 30);
    t.status = j.value("status", "completed");
    t.abort_reason = j.value("abort_reason", "");

    for (const auto& jt : j.at("turns")) {
        Turn turn;
        turn.round = jt.at("round").get<int>();
        turn.speaker = jt.at("speaker").get<std::string>() == "buyer" ? Speaker::buyer
                                                                      : Speaker::seller;
        turn.text = jt.at("text").get<std::string>();
        if (!jt.at("extracted_price").is_null())
            turn.extracted_price = money_from_json(jt.at("extracted_price"));
        t.turns.push_back(std::move(turn));
    }

    if (!j.at("outcome").is_null()) {
        const auto& jo = j.at("outcome");
        Outcome o;
        o.decision = jo.at("decision").get<std::string>() == "accept"
                         ? Outcome::FinalDecision::accept
                         : Outcome::FinalDecision::reject;
        o.rounds_used = jo.at("rounds_used").get<int>();
        o.deadlock = jo.at("deadlock").get<bool>();
        o.downgraded_accept = jo.value("downgraded_accept", false);
        if (!jo.at("final_price").is_null()) o.final_price = money_from_json(jo.at("final_price"));
        for (const auto& entry : jo.at("trajectory"))
            o.trajectory.emplace_back(entry.at(0).get<int>(), money_from_json(entry.at(1)));
        const auto& jf = j.at("flags");
        o.flags.over_budget = jf.at("over_budget").get<bool>();
        o.flags.below_wholesale = jf.at("below_wholesale").get<bool>();
        o.flags.over_retail = jf.at("over_retail").get<bool>();
        t.outcome = std::move(o);
    }
    const auto& ts = j.at("timestamps");
    t.started_ms = ts.at("started_ms").get<std::int64_t>();
    t.finished_ms = ts.at("finished_ms").get<std::int64_t>();
    return t;
}

}  // namespace dealbench::engine
