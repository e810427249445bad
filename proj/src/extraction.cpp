#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include "dealbench/agents.hpp"

namespace dealbench::agents {

namespace {

struct Token {
    std::string text;        // raw token, surrounding punctuation intact
    std::string word;        // lowercased, punctuation stripped
    bool sentence_end = false;
    int sentence = 0;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    int sentence = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        Token tok;
        tok.text = std::string(text.substr(i, j - i));
        for (char c : tok.text) {
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'')
                tok.word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        const char last = tok.text.back();
        tok.sentence_end = last == '.' || last == '!' || last == '?' || last == ';';
        tok.sentence = sentence;
        if (tok.sentence_end) ++sentence;
        tokens.push_back(std::move(tok));
        i = j;
    }
    return tokens;
}

// "$25,000," / "($15500.50)" -> the contained dollar amount, if any.
std::optional<Money> dollar_amount(const std::string& token) {
    const auto dollar = token.find('$');
    if (dollar == std::string::npos || dollar + 1 >= token.size()) return std::nullopt;
    std::size_t i = dollar + 1;
    std::string digits;
    bool seen_digit = false;
    while (i < token.size()) {
        const char c = token[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
        } else if (c == ',' && seen_digit) {
            // thousands separator, skip
        } else if (c == '.' && i + 1 < token.size() &&
                   std::isdigit(static_cast<unsigned char>(token[i + 1]))) {
            digits.push_back(c);
        } else {
            break;
        }
        ++i;
    }
    if (!seen_digit) return std::nullopt;
    try {
        return Money::parse(digits);
    } catch (const MoneyError&) {
        return std::nullopt;
    }
}

bool is_addon_word(const std::string& w) {
    static const char* kAddons[] = {"warranty",  "warranties", "insurance", "gift",
                                    "gifts",     "add-on",     "add-ons",   "addon",
                                    "addons"};
    for (const char* a : kAddons)
        if (w == a) return true;
    return w.rfind("accessor", 0) == 0;
}

bool is_offer_verb(const std::string& w) {
    static const char* kVerbs[] = {"offer", "offers", "offered", "offering", "sell",
                                   "sells", "selling", "do", "price", "priced"};
    for (const char* v : kVerbs)
        if (w == v) return true;
    return false;
}

constexpr int kAddonWindow = 8;  // tokens either side, same sentence
constexpr int kVerbWindow = 4;   // tokens before, same sentence

bool contains_any(const std::string& haystack, std::initializer_list<const char*> needles) {
    for (const char* n : needles)
        if (haystack.find(n) != std::string::npos) return true;
    return false;
}

}  // namespace

std::optional<Money> extract_price(std::string_view seller_message) {
    const auto tokens = tokenize(seller_message);

    struct Candidate {
        Money value;
        int pos;
    };
    std::vector<Candidate> candidates;
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i)
        if (auto m = dollar_amount(tokens[i].text)) candidates.push_back({*m, i});
    if (candidates.empty()) return std::nullopt;

    auto tainted = [&](const Candidate& c) {
        const int lo = std::max(0, c.pos - kAddonWindow);
        const int hi = std::min(static_cast<int>(tokens.size()) - 1, c.pos + kAddonWindow);
        for (int i = lo; i <= hi; ++i)
            if (tokens[i].sentence == tokens[c.pos].sentence && is_addon_word(tokens[i].word))
                return true;
        return false;
    };
    std::vector<Candidate> pool;
    for (const auto& c : candidates)
        if (!tainted(c)) pool.push_back(c);
    if (pool.empty()) pool = candidates;  // every price is near an add-on word

    auto near_offer_verb = [&](const Candidate& c) {
        const int lo = std::max(0, c.pos - kVerbWindow);
        for (int i = lo; i < c.pos; ++i)
            if (tokens[i].sentence == tokens[c.pos].sentence && is_offer_verb(tokens[i].word))
                return true;
        return false;
    };
    std::vector<Candidate> with_verbs;
    for (const auto& c : pool)
        if (near_offer_verb(c)) with_verbs.push_back(c);
    if (!with_verbs.empty()) pool = with_verbs;

    return pool.back().value;  // last mentioned wins ties
}

Decision classify_decision(std::string_view buyer_message, std::string_view /*seller_message*/) {
    std::string text(buyer_message);
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    if (contains_any(text, {"cannot afford", "can't afford", "cant afford", "walk away",
                            "walking away", "no deal", "not interested", "reject",
                            "decline", "cannot proceed", "can't proceed",
                            "end the negotiation", "end this negotiation"}))
        return Decision::rejection;

    const bool negated_accept =
        contains_any(text, {"cannot accept", "can't accept", "cant accept", "won't accept",
                            "will not accept", "not accept"});
    if (!negated_accept &&
        contains_any(text, {"i accept", "i'll take it", "i will take it", "we have a deal",
                            "it's a deal", "its a deal", "i agree", "accept your offer",
                            "deal,", "deal."}))
        return Decision::acceptance;

    return Decision::continue_negotiation;
}

std::string to_string(Decision d) {
    switch (d) {
        case Decision::acceptance: return "ACCEPTANCE";
        case Decision::rejection: return "REJECTION";
        case Decision::continue_negotiation: break;
    }
    return "CONTINUE";
}

std::optional<Decision> parse_decision_keyword(std::string_view model_output) {
    std::string text(model_output);
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    const auto acc = text.find("ACCEPTANCE");
    const auto rej = text.find("REJECTION");
    const auto cont = text.find("CONTINUE");
    std::size_t best = std::string::npos;
    std::optional<Decision> out;
    if (acc < best) {
        best = acc;
        out = Decision::acceptance;
    }
    if (rej < best) {
        best = rej;
        out = Decision::rejection;
    }
    if (cont < best) {
        best = cont;
        out = Decision::continue_negotiation;
    }
    return out;
}

std::optional<Money> parse_analyst_output(std::string_view model_output) {
    std::string text(model_output);
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return std::nullopt;
    const auto last = text.find_last_not_of(" \t\r\n");
    text = text.substr(first, last - first + 1);
    if (text == "none" || text == "'none'" || text == "\"none\"") return std::nullopt;
    if (text.rfind("price:", 0) == 0) text = text.substr(6);
    try {
        return Money::parse(text);
    } catch (const MoneyError&) {
        return std::nullopt;
    }
}

ScriptedStep scripted_step(const ScriptedPolicy& policy, const ScriptedView& view) {
    const Money step = view.retail_price.scale(policy.step_ratio);
    const bool is_buyer = policy.role == ScriptedPolicy::Role::buyer;

    Money planned;
    if (is_buyer) {
        const Money open = view.retail_price.scale(policy.open_ratio);
        planned = open + Money::from_cents(step.cents() * view.own_message_count);
        planned = std::min(planned, policy.floor_or_cap);  // never exceed the budget
    } else {
        planned = view.retail_price - Money::from_cents(step.cents() * view.own_message_count);
        planned = std::max(planned, policy.floor_or_cap);  // never go below wholesale
    }

    const bool cross = view.opponent_offer &&
                       (is_buyer ? *view.opponent_offer <= planned : *view.opponent_offer >= planned);
    if (cross) {
        const Money price = *view.opponent_offer;
        ScriptedStep out;
        if (is_buyer)
            out.utterance = "Deal, I accept your offer of $" + price.str() + ".";
        else
            out.utterance = "Deal, I accept your offer of $" + price.str() + ". It's yours for $" +
                            price.str() + ".";
        out.proposed_price = price;
        out.intent = Decision::acceptance;
        return out;
    }

    ScriptedStep out;
    if (is_buyer) {
        if (view.own_message_count == 0)
            out.utterance = "Hello! I'm very interested in the " + view.product_name +
                            ". Would you consider $" + planned.str() + "?";
        else
            out.utterance = "I appreciate it, but I can do $" + planned.str() +
                            ". Could you meet me there?";
    } else {
        if (view.own_message_count == 0)
            out.utterance = "Thanks for your interest in the " + view.product_name +
                            ". I can offer it to you for $" + planned.str() + ".";
        else
            out.utterance = "I hear you. The best I can do is $" + planned.str() + ".";
    }
    out.proposed_price = planned;
    out.intent = Decision::continue_negotiation;
    return out;
}

}  // namespace dealbench::agents
