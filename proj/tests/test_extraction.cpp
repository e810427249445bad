#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "dealbench/agents.hpp"

using namespace dealbench;
using namespace dealbench::agents;

TEST_CASE("extract_price reproduces the analyst reference examples") {
    CHECK(extract_price("I can offer you this car for $25000, which is a fair price considering "
                        "its features.")
              ->cents() == 2500000);
    CHECK(!extract_price("Thank you for your interest in our product. Let me know if you have any "
                         "specific questions about its features."));
    CHECK(extract_price("I understand your budget constraints, but the best I can do is $22900 "
                        "and include a $3000 warranty.")
              ->cents() == 2290000);
    CHECK(extract_price("I can sell it to you for $15500. We also offer an extended warranty for "
                        "$1200 if you're interested.")
              ->cents() == 1550000);
}

TEST_CASE("extract_price handles formatting variants") {
    CHECK(extract_price("How about $1,299,000.50 for the villa?")->cents() == 129900050);
    CHECK(extract_price("Final answer: $42.")->cents() == 4200);
    CHECK(extract_price("I could include a gift worth $50 with the $900 console.")->cents() ==
          90000);
    CHECK(!extract_price(""));
    CHECK(!extract_price("It costs a lot."));
    CHECK(!extract_price("The $ sign alone means nothing."));
}

TEST_CASE("extract_price returns the lone price when no add-on context exists") {
    std::mt19937_64 rng(11);
    const char* prefixes[] = {"I can do ", "My price is ", "Let's settle at ",
                              "The car goes for ", "Take it for "};
    const char* suffixes[] = {" today.", ", final offer.", " and not a cent less.",
                              " if you pick it up.", "."};
    for (int i = 0; i < 200; ++i) {
        const long long cents = 100 + static_cast<long long>(rng() % 10000000);
        const Money price = Money::from_cents(cents);
        const std::string msg = std::string(prefixes[i % 5]) + "$" + price.str() + suffixes[i % 5];
        auto got = extract_price(msg);
        REQUIRE(got.has_value());
        CHECK(got->cents() == cents);
    }
}

TEST_CASE("classify_decision covers the judge's three verdicts") {
    CHECK(classify_decision("Deal, I accept your offer of $85.", "") == Decision::acceptance);
    CHECK(classify_decision("I cannot afford that, I'm walking away.", "") == Decision::rejection);
    CHECK(classify_decision("Could you do $70 instead?", "") == Decision::continue_negotiation);
}

TEST_CASE("classify_decision agrees with the hand-labeled fixture") {
    const std::pair<const char*, Decision> fixture[] = {
        {"Deal, I accept your offer of $85.", Decision::acceptance},
        {"I accept. Let's finalize the paperwork.", Decision::acceptance},
        {"That works for me, I accept your offer.", Decision::acceptance},
        {"I'll take it at that price.", Decision::acceptance},
        {"We have a deal at $14,250.", Decision::acceptance},
        {"It's a deal. Thank you!", Decision::acceptance},
        {"I agree to $500, let's proceed.", Decision::acceptance},
        {"Sounds fair. I accept your offer of $22,000.", Decision::acceptance},
        {"Deal. Send me the invoice.", Decision::acceptance},
        {"Fine, $900 it is. I accept.", Decision::acceptance},

        {"I cannot afford that, I'm walking away.", Decision::rejection},
        {"That's above my budget, I can't afford it.", Decision::rejection},
        {"No deal. Goodbye.", Decision::rejection},
        {"I'm not interested anymore.", Decision::rejection},
        {"I must reject your offer.", Decision::rejection},
        {"I have to decline; it's too expensive for me.", Decision::rejection},
        {"Sorry, I'm walking away from this one.", Decision::rejection},
        {"We're done here, no deal.", Decision::rejection},
        {"I cannot proceed at that price.", Decision::rejection},
        {"Let's end the negotiation, this is going nowhere.", Decision::rejection},

        {"Could you do $70 instead?", Decision::continue_negotiation},
        {"That's still high. How about $18,500?", Decision::continue_negotiation},
        {"Can you include delivery at that price?", Decision::continue_negotiation},
        {"Hmm, let me think. What's your best price?", Decision::continue_negotiation},
        {"I was hoping for something closer to $12,000.", Decision::continue_negotiation},
        {"Is there any flexibility on the price?", Decision::continue_negotiation},
        {"I can stretch to $840, but that's my ceiling.", Decision::continue_negotiation},
        {"Why is it priced above similar listings?", Decision::continue_negotiation},
        {"I cannot accept that price yet; can you go lower?", Decision::continue_negotiation},
        {"Meet me at $15,900 and we can talk.", Decision::continue_negotiation},
    };
    for (const auto& [message, expected] : fixture) {
        INFO("message: " << message);
        CHECK(classify_decision(message, "") == expected);
    }
}

TEST_CASE("tolerant post-processing for remote judge and analyst replies") {
    CHECK(parse_decision_keyword("ACCEPTANCE") == Decision::acceptance);
    CHECK(parse_decision_keyword("  rejection\n") == Decision::rejection);
    CHECK(parse_decision_keyword("The answer is: CONTINUE.") == Decision::continue_negotiation);
    CHECK(parse_decision_keyword("REJECTION or CONTINUE? REJECTION.") == Decision::rejection);
    CHECK(!parse_decision_keyword("no idea"));

    CHECK(parse_analyst_output("$25000")->cents() == 2500000);
    CHECK(parse_analyst_output("25000")->cents() == 2500000);
    CHECK(parse_analyst_output("Price: $25000")->cents() == 2500000);
    CHECK(parse_analyst_output(" price: 25,000.50 ")->cents() == 2500050);
    CHECK(!parse_analyst_output("None"));
    CHECK(!parse_analyst_output(" none \n"));
    CHECK(!parse_analyst_output("I cannot tell"));
}
