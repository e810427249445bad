#include "dealbench/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dealbench::prompts {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PromptError("cannot open template file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

const char* kRoleNames[] = {"buyer_system", "seller_system", "buyer_greeting", "judge", "analyst"};

}  // namespace

std::string to_string(PromptRole role) { return kRoleNames[static_cast<int>(role)]; }

std::optional<PromptRole> prompt_role_from_string(std::string_view s) {
    for (int i = 0; i < 5; ++i)
        if (s == kRoleNames[i]) return static_cast<PromptRole>(i);
    return std::nullopt;
}

std::string render(const PromptTemplate& tmpl, const Context& context) {
    const std::string& body = tmpl.body;
    std::string out;
    out.reserve(body.size() + 64);
    std::size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '{' && i + 1 < body.size() && ident_start(body[i + 1])) {
            std::size_t j = i + 1;
            while (j < body.size() && ident_char(body[j])) ++j;
            if (j < body.size() && body[j] == '}') {
                const std::string name = body.substr(i + 1, j - i - 1);
                auto it = context.find(name);
                if (it == context.end()) throw MissingPlaceholder(name);
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(body[i]);
        ++i;
    }
    return out;
}

// Axis order fixes the index: budget emphasis is the most significant digit,
// non-price ask the least.
int StrategyAction::index() const {
    int idx = budget_emphasis == BudgetEmphasis::hard ? 0 : 1;
    idx = idx * 2 + (price_increase_policy == PriceIncreasePolicy::end_now ? 0 : 1);
    idx = idx * 3 + (exit_turns - 2);
    idx = idx * 2 + (progress_threshold == ProgressThreshold::tiny ? 0 : 1);
    idx = idx * 2 + (concession_style == ConcessionStyle::none ? 0 : 1);
    idx = idx * 2 + (non_price_ask ? 1 : 0);
    return idx;
}

StrategyAction StrategyAction::from_index(int index) {
    if (index < 0 || index >= kActionCount)
        throw PromptError("strategy action index out of range: " + std::to_string(index));
    StrategyAction a;
    a.non_price_ask = index % 2 == 1;
    index /= 2;
    a.concession_style = index % 2 == 0 ? ConcessionStyle::none : ConcessionStyle::tiny_steps;
    index /= 2;
    a.progress_threshold = index % 2 == 0 ? ProgressThreshold::tiny : ProgressThreshold::small;
    index /= 2;
    a.exit_turns = index % 3 + 2;
    index /= 3;
    a.price_increase_policy =
        index % 2 == 0 ? PriceIncreasePolicy::end_now : PriceIncreasePolicy::warn_then_end;
    index /= 2;
    a.budget_emphasis = index % 2 == 0 ? BudgetEmphasis::hard : BudgetEmphasis::medium_hard;
    return a;
}

std::vector<StrategyAction> enumerate_actions() {
    std::vector<StrategyAction> actions;
    actions.reserve(kActionCount);
    for (int i = 0; i < kActionCount; ++i) actions.push_back(StrategyAction::from_index(i));
    return actions;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    PromptLibrary lib;
    for (int i = 0; i < 5; ++i) {
        const auto role = static_cast<PromptRole>(i);
        lib.templates_.push_back({role, read_file(dir / (to_string(role) + ".txt"))});
    }

    nlohmann::json axes;
    try {
        axes = nlohmann::json::parse(read_file(dir / "strategy_axes.json"));
    } catch (const nlohmann::json::exception& e) {
        throw PromptError(std::string("invalid strategy_axes.json: ") + e.what());
    }
    auto string_map = [&](const char* key) {
        std::map<std::string, std::string> out;
        for (auto& [k, v] : axes.at(key).items()) out[k] = v.get<std::string>();
        return out;
    };
    StrategyAxes& a = lib.axes_;
    a.header = axes.at("header").get<std::string>();
    a.budget_emphasis = string_map("budget_emphasis");
    a.price_increase_policy = string_map("price_increase_policy");
    a.exit_turns = axes.at("exit_turns").get<std::string>();
    a.progress_threshold = string_map("progress_threshold");
    a.concession_style = string_map("concession_style");
    a.non_price_ask = string_map("non_price_ask");
    a.fixed = {axes.at("fixed").at("refusal_tone").get<std::string>(),
               axes.at("fixed").at("brevity").get<std::string>(),
               axes.at("fixed").at("self_check_clause").get<std::string>()};
    return lib;
}

const PromptTemplate& PromptLibrary::get(PromptRole role) const {
    return templates_[static_cast<int>(role)];
}

std::string PromptLibrary::strategy_prompt_body(const StrategyAction& action) const {
    auto directive = [](const std::map<std::string, std::string>& axis, const std::string& key) {
        auto it = axis.find(key);
        if (it == axis.end()) throw PromptError("strategy axis missing value: " + key);
        return it->second;
    };

    std::string exit_line = render({PromptRole::buyer_system, axes_.exit_turns},
                                   {{"exit_turns", std::to_string(action.exit_turns)}});

    std::string out = get(PromptRole::buyer_system).body;
    out += "\n" + axes_.header + "\n";
    out += "- " + directive(axes_.budget_emphasis,
                            action.budget_emphasis == BudgetEmphasis::hard ? "hard" : "medium_hard") +
           "\n";
    out += "- " +
           directive(axes_.price_increase_policy,
                     action.price_increase_policy == PriceIncreasePolicy::end_now ? "end_now"
                                                                                  : "warn_then_end") +
           "\n";
    out += "- " + exit_line + "\n";
    out += "- " + directive(axes_.progress_threshold,
                            action.progress_threshold == ProgressThreshold::tiny ? "tiny" : "small") +
           "\n";
    out += "- " + directive(axes_.concession_style,
                            action.concession_style == ConcessionStyle::none ? "none" : "tiny_steps") +
           "\n";
    out += "- " + directive(axes_.non_price_ask, action.non_price_ask ? "true" : "false") + "\n";
    for (const auto& fixed : axes_.fixed) out += "- " + fixed + "\n";
    return out;
}

std::map<std::string, std::uint64_t> PromptLibrary::content_hashes() const {
    std::map<std::string, std::uint64_t> hashes;
    for (const auto& t : templates_) hashes[to_string(t.role)] = fnv1a64(t.body);
    std::string axes_blob = axes_.header + axes_.exit_turns;
    for (const auto* m : {&axes_.budget_emphasis, &axes_.price_increase_policy,
                          &axes_.progress_threshold, &axes_.concession_style, &axes_.non_price_ask})
        for (const auto& [k, v] : *m) axes_blob += k + v;
    for (const auto& f : axes_.fixed) axes_blob += f;
    hashes["strategy_axes"] = fnv1a64(axes_blob);
    return hashes;
}

std::string product_info_for_buyer(const catalog::Product& p) {
    return "Product Name: " + p.name + "\nRetail Price: $" + p.retail_price.str() +
           "\nFeatures: " + p.features;
}

std::string product_info_for_seller(const catalog::Product& p) {
    return "Product Name: " + p.name + "\nRetail Price: $" + p.retail_price.str() +
           "\nWholesale Price: $" + p.wholesale_price.str() + "\nFeatures: " + p.features;
}

Context buyer_context(const catalog::Product& p, Money budget) {
    return {{"products_info", product_info_for_buyer(p)}, {"budget", budget.str()}};
}

Context seller_context(const catalog::Product& p) {
    return {{"products_info", product_info_for_seller(p)}};
}

Context greeting_context(const catalog::Product& p, std::optional<Money> budget) {
    std::string budget_line;
    if (budget) budget_line = "Your maximum budget for this purchase is $" + budget->str() + ".";
    return {{"product_name", p.name},
            {"retail_price", "$" + p.retail_price.str()},
            {"features", p.features},
            {"budget_line", budget_line}};
}

Context judge_context(std::string_view buyer_message, std::optional<std::string_view> seller_message) {
    return {{"latest_buyer_message", std::string(buyer_message)},
            {"latest_seller_message",
             seller_message ? std::string(*seller_message) : std::string("No response yet")}};
}

Context analyst_context(std::string_view seller_message) {
    return {{"seller_message", std::string(seller_message)}};
}

}  // namespace dealbench::prompts
