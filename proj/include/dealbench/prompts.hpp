#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dealbench/catalog.hpp"
#include "dealbench/money.hpp"

namespace dealbench::prompts {

struct PromptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingPlaceholder : PromptError {
    explicit MissingPlaceholder(const std::string& name)
        : PromptError("unresolved placeholder: {" + name + "}"), placeholder(name) {}
    std::string placeholder;
};

enum class PromptRole { buyer_system, seller_system, buyer_greeting, judge, analyst };

std::string to_string(PromptRole role);
std::optional<PromptRole> prompt_role_from_string(std::string_view s);

struct PromptTemplate {
    PromptRole role;
    std::string body;
};

using Context = std::map<std::string, std::string>;

/// Single-pass substitution of {identifier} placeholders. Throws
/// MissingPlaceholder for any placeholder absent from the context.
std::string render(const PromptTemplate& tmpl, const Context& context);

// ---------------------------------------------------------------------------
// Strategy action space: 2 x 2 x 3 x 2 x 2 x 2 = 96 buyer prompt variants.
// ---------------------------------------------------------------------------

enum class BudgetEmphasis { hard, medium_hard };
enum class PriceIncreasePolicy { end_now, warn_then_end };
enum class ProgressThreshold { tiny, small };    // 0.3% / 0.8% of retail
enum class ConcessionStyle { none, tiny_steps };

struct StrategyAction {
    BudgetEmphasis budget_emphasis = BudgetEmphasis::hard;
    PriceIncreasePolicy price_increase_policy = PriceIncreasePolicy::end_now;
    int exit_turns = 2;  // 2, 3 or 4
    ProgressThreshold progress_threshold = ProgressThreshold::tiny;
    ConcessionStyle concession_style = ConcessionStyle::none;
    bool non_price_ask = false;

    int index() const;
    static StrategyAction from_index(int index);

    double progress_ratio() const {
        return progress_threshold == ProgressThreshold::tiny ? 0.003 : 0.008;
    }

    bool operator==(const StrategyAction&) const = default;
};

inline constexpr int kActionCount = 96;

/// All 96 actions in index order (lexicographic over the axes above).
std::vector<StrategyAction> enumerate_actions();

struct StrategyAxes {
    std::string header;
    std::map<std::string, std::string> budget_emphasis;
    std::map<std::string, std::string> price_increase_policy;
    std::string exit_turns;  // carries the {exit_turns} placeholder
    std::map<std::string, std::string> progress_threshold;
    std::map<std::string, std::string> concession_style;
    std::map<std::string, std::string> non_price_ask;
    std::vector<std::string> fixed;  // refusal tone, brevity, self-check
};

// ---------------------------------------------------------------------------
// Template library: one UTF-8 file per role plus the strategy-axes file.
// ---------------------------------------------------------------------------

class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir);

    const PromptTemplate& get(PromptRole role) const;
    const StrategyAxes& axes() const { return axes_; }

    /// buyer_system body plus one directive line per axis; byte-deterministic.
    std::string strategy_prompt_body(const StrategyAction& action) const;

    /// Content hash per template file, for run manifests.
    std::map<std::string, std::uint64_t> content_hashes() const;

private:
    std::vector<PromptTemplate> templates_;
    StrategyAxes axes_;
};

// Context builders used by the engine and the CLI. The buyer context never
// carries the wholesale price; the seller context never carries the budget.
std::string product_info_for_buyer(const catalog::Product& p);
std::string product_info_for_seller(const catalog::Product& p);
Context buyer_context(const catalog::Product& p, Money budget);
Context seller_context(const catalog::Product& p);
Context greeting_context(const catalog::Product& p, std::optional<Money> budget);
Context judge_context(std::string_view buyer_message, std::optional<std::string_view> seller_message);
Context analyst_context(std::string_view seller_message);

}  // namespace dealbench::prompts
