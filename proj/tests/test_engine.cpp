#include "doctest.h"

#include "dealbench/engine.hpp"
#include "dealbench/metrics.hpp"

using namespace dealbench;
using namespace dealbench::engine;

namespace {

catalog::Product widget(long long retail_cents, long long wholesale_cents) {
    catalog::Product p;
    p.name = "Widget";
    p.retail_price = Money::from_cents(retail_cents);
    p.wholesale_price = Money::from_cents(wholesale_cents);
    p.features = "A widget.";
    p.reference = "https://example.com/widget";
    return p;
}

NegotiationConfig config_for(const catalog::Product& p, long long budget_cents, int t_max = 30) {
    NegotiationConfig c;
    c.product = p;
    c.budget = Money::from_cents(budget_cents);
    c.budget_level = catalog::BudgetLevel::retail;
    c.t_max = t_max;
    c.run_id = "test";
    return c;
}

struct FixedSeller : Negotiator {
    std::string text;
    explicit FixedSeller(std::string t) : text(std::move(t)) {}
    std::string id() const override { return "fixed_seller"; }
    std::string next_message(const NegotiatorView&) override { return text; }
};

struct FixedBuyer : Negotiator {
    std::string opening;
    std::string reply;
    std::string id() const override { return "fixed_buyer"; }
    std::string next_message(const NegotiatorView& view) override {
        return view.own_message_count == 0 ? opening : reply;
    }
};

struct FixedJudge : Judge {
    agents::Decision decision;
    explicit FixedJudge(agents::Decision d) : decision(d) {}
    agents::Decision decide(const std::string&, const std::optional<std::string>&) override {
        return decision;
    }
};

struct FailingSeller : Negotiator {
    std::string id() const override { return "failing_seller"; }
    std::string next_message(const NegotiatorView&) override {
        throw agents::TransportError("socket closed");
    }
};

Transcript run_scripted(long long retail, long long wholesale, long long budget, int t_max = 30) {
    ScriptedNegotiator buyer("scripted_buyer", 0.70, 0.05);
    ScriptedNegotiator seller("scripted_seller", 1.0, 0.05);
    RuleJudge judge;
    RuleAnalyst analyst;
    const auto product = widget(retail, wholesale);
    return run_negotiation(buyer, seller, judge, analyst, config_for(product, budget, t_max));
}

}  // namespace

TEST_CASE("crossing scenario closes at 85.00 in round 4") {
    const auto t = run_scripted(10000, 6000, 10000);
    REQUIRE(t.status == "completed");
    REQUIRE(t.outcome.has_value());
    const Outcome& o = *t.outcome;
    CHECK(o.decision == Outcome::FinalDecision::accept);
    REQUIRE(o.final_price.has_value());
    CHECK(o.final_price->str() == "85.00");
    CHECK(o.rounds_used == 4);
    CHECK(!o.deadlock);

    // Greeting plus four rounds of seller/buyer exchanges.
    REQUIRE(t.turns.size() == 9);
    CHECK(t.turns[0].speaker == Speaker::buyer);
    CHECK(t.turns[0].round == 1);
    CHECK(t.turns[0].extracted_price->cents() == 7000);

    // Hand-simulated offer ladders.
    const long long seller_offers[] = {10000, 9500, 9000, 8500};
    const long long buyer_offers[] = {7500, 8000, 8500, 8500};
    for (int round = 1; round <= 4; ++round) {
        const Turn& seller_turn = t.turns[static_cast<std::size_t>(2 * round - 1)];
        const Turn& buyer_turn = t.turns[static_cast<std::size_t>(2 * round)];
        CHECK(seller_turn.speaker == Speaker::seller);
        CHECK(seller_turn.round == round);
        CHECK(seller_turn.extracted_price->cents() == seller_offers[round - 1]);
        CHECK(buyer_turn.speaker == Speaker::buyer);
        CHECK(buyer_turn.extracted_price->cents() == buyer_offers[round - 1]);
    }

    // Trajectory records every seller extraction; its tail is the final price.
    REQUIRE(o.trajectory.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(o.trajectory[static_cast<std::size_t>(i)].first == i + 1);
        CHECK(o.trajectory[static_cast<std::size_t>(i)].second.cents() == seller_offers[i]);
    }
    CHECK(o.trajectory.back().second == *o.final_price);

    const auto& f = o.flags;
    CHECK(!f.over_budget);
    CHECK(!f.below_wholesale);
    CHECK(!f.over_retail);
}

TEST_CASE("infeasible budget deadlocks at t_max and counts as a rejection") {
    const auto t = run_scripted(10000, 8000, 6500);
    REQUIRE(t.outcome.has_value());
    const Outcome& o = *t.outcome;
    CHECK(o.decision == Outcome::FinalDecision::reject);
    CHECK(!o.final_price.has_value());
    CHECK(o.rounds_used == 30);
    CHECK(o.deadlock);
    CHECK(t.turns.size() == 61);
    // The seller never moved below its floor, the buyer never above its cap.
    for (const auto& turn : t.turns) {
        if (!turn.extracted_price) continue;
        if (turn.speaker == Speaker::seller) CHECK(turn.extracted_price->cents() >= 8000);
        if (turn.speaker == Speaker::buyer) CHECK(turn.extracted_price->cents() <= 6500);
    }
}

TEST_CASE("immediate judge acceptance closes in round 1 at the standing offer") {
    FixedBuyer buyer;
    buyer.opening = "Hello! Interested. Would you take $90.00?";
    buyer.reply = "Understood.";
    FixedSeller seller("I can offer it for $100.00.");
    FixedJudge judge(agents::Decision::acceptance);
    RuleAnalyst analyst;
    const auto product = widget(10000, 6000);
    const auto t = run_negotiation(buyer, seller, judge, analyst, config_for(product, 10000));
    REQUIRE(t.outcome.has_value());
    CHECK(t.outcome->decision == Outcome::FinalDecision::accept);
    CHECK(t.outcome->final_price->cents() == 10000);
    CHECK(t.outcome->rounds_used == 1);
}

TEST_CASE("acceptance without any standing offer downgrades to a reject") {
    FixedBuyer buyer;
    buyer.opening = "Hello! Lovely widget.";
    buyer.reply = "I accept.";
    FixedSeller seller("Happy to discuss whenever you are ready.");  // never names a price
    FixedJudge judge(agents::Decision::acceptance);
    RuleAnalyst analyst;
    const auto t = run_negotiation(buyer, seller, judge, analyst,
                                   config_for(widget(10000, 6000), 10000));
    REQUIRE(t.outcome.has_value());
    CHECK(t.outcome->decision == Outcome::FinalDecision::reject);
    CHECK(t.outcome->downgraded_accept);
    CHECK(!t.outcome->final_price.has_value());
    CHECK(!t.outcome->deadlock);
}

TEST_CASE("finalize flag boundaries") {
    const auto product = widget(10000, 6000);

    SUBCASE("accept above budget") {
        Outcome o;
        o.decision = Outcome::FinalDecision::accept;
        o.final_price = Money::from_cents(10500);
        const auto flags = finalize_flags(o, config_for(product, 10000));
        CHECK(flags.over_budget);
        CHECK(flags.over_retail);
        CHECK(!flags.below_wholesale);
    }
    SUBCASE("accept below wholesale") {
        Outcome o;
        o.decision = Outcome::FinalDecision::accept;
        o.final_price = Money::from_cents(5900);
        const auto flags = finalize_flags(o, config_for(product, 10000));
        CHECK(flags.below_wholesale);
        CHECK(!flags.over_budget);
        CHECK(!flags.over_retail);
    }
    SUBCASE("reject carries no flags") {
        Outcome o;
        o.decision = Outcome::FinalDecision::reject;
        const auto flags = finalize_flags(o, config_for(product, 10000));
        CHECK(!flags.over_budget);
        CHECK(!flags.below_wholesale);
        CHECK(!flags.over_retail);
    }
}

TEST_CASE("finalize before termination is an IllegalState") {
    ScriptedNegotiator buyer("b", 0.70, 0.05);
    ScriptedNegotiator seller("s", 1.0, 0.05);
    RuleJudge judge;
    RuleAnalyst analyst;
    Episode episode(buyer, seller, judge, analyst, config_for(widget(10000, 6000), 10000));
    CHECK_THROWS_AS(episode.finalize(), IllegalState);
    episode.step();  // one non-terminal round
    CHECK_THROWS_AS(episode.finalize(), IllegalState);
}

TEST_CASE("t_max must be at least one") {
    ScriptedNegotiator buyer("b", 0.70, 0.05);
    ScriptedNegotiator seller("s", 1.0, 0.05);
    RuleJudge judge;
    RuleAnalyst analyst;
    CHECK_THROWS_AS(Episode(buyer, seller, judge, analyst, config_for(widget(100, 60), 100, 0)),
                    EngineError);
}

TEST_CASE("transport failures abort the episode but keep partial turns") {
    ScriptedNegotiator buyer("b", 0.70, 0.05);
    FailingSeller seller;
    RuleJudge judge;
    RuleAnalyst analyst;
    const auto t = run_negotiation(buyer, seller, judge, analyst,
                                   config_for(widget(10000, 6000), 10000));
    CHECK(t.status == "aborted");
    CHECK(!t.outcome.has_value());
    CHECK(t.turns.size() == 1);  // the greeting survived
    CHECK(t.abort_reason.find("socket closed") != std::string::npos);
}

TEST_CASE("empty utterances abort as protocol errors") {
    FixedBuyer buyer;
    buyer.opening = "Hello!";
    buyer.reply = "ok";
    FixedSeller seller("   ");
    RuleJudge judge;
    RuleAnalyst analyst;
    const auto t = run_negotiation(buyer, seller, judge, analyst,
                                   config_for(widget(10000, 6000), 10000));
    CHECK(t.status == "aborted");
    CHECK(t.abort_reason.find("empty seller utterance") != std::string::npos);
}

TEST_CASE("scripted episodes are bit-reproducible and survive a JSON round trip") {
    const auto a = run_scripted(10000, 6000, 10000);
    const auto b = run_scripted(10000, 6000, 10000);
    CHECK(transcript_to_json(a) == transcript_to_json(b));

    const auto restored = transcript_from_json(transcript_to_json(a));
    CHECK(transcript_to_json(restored) == transcript_to_json(a));

    // Replay determinism: metrics facts from the persisted transcript match
    // the in-memory ones.
    const auto live = metrics::deal_from_transcript(a);
    const auto replayed = metrics::deal_from_transcript(restored);
    CHECK(live.accepted == replayed.accepted);
    CHECK(live.final_price == replayed.final_price);
    CHECK(live.deadlock == replayed.deadlock);
    CHECK(live.beta == replayed.beta);
    CHECK(live.retail_price == replayed.retail_price);
    CHECK(live.wholesale_price == replayed.wholesale_price);
}
