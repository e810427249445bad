// dealbench: agent-to-agent price negotiation benchmark.
//
// Subcommands: catalog validate, run, metrics, optimize, prompts show.
// Exit codes: 0 success, 2 config error, 3 abort-threshold breach, 4 no data.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "dealbench/bandit.hpp"
#include "dealbench/catalog.hpp"
#include "dealbench/engine.hpp"
#include "dealbench/metrics.hpp"
#include "dealbench/prompts.hpp"
#include "dealbench/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAbortThreshold = 3;
constexpr int kExitNoData = 4;

using namespace dealbench;

int cmd_catalog_validate(const std::string& path) {
    const auto products = catalog::load_catalog_file(path);
    std::cout << catalog::serialize_catalog(products) << "\n";
    std::cerr << products.size() << " products OK\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path) {
    const auto config = runner::load_config(config_path);
    const auto result = runner::execute(config);
    std::cerr << "planned " << result.planned << ", completed " << result.completed << ", aborted "
              << result.aborted << ", skipped (resume) " << result.skipped << "\n";
    std::cerr << "transcripts: " << (result.run_dir / "transcripts.jsonl").string() << "\n";
    if (result.threshold_breached) {
        std::cerr << "abort threshold breached\n";
        return kExitAbortThreshold;
    }
    return kExitOk;
}

int cmd_metrics(const std::string& run_dir, const std::string& reference_seller,
                const std::string& rp_mode, const std::string& baseline_buyer,
                const std::string& baseline_seller) {
    runner::AggregateOptions options;
    if (!reference_seller.empty()) options.metrics.reference_seller = reference_seller;
    options.metrics.rp_mode =
        rp_mode == "category" ? metrics::RpMode::per_category : metrics::RpMode::global;
    const auto report = runner::aggregate(run_dir, options);

    std::vector<metrics::ImbalanceRow> imbalance;
    const std::vector<metrics::ImbalanceRow>* imbalance_ptr = nullptr;
    if (!baseline_buyer.empty() && !baseline_seller.empty()) {
        imbalance = metrics::imbalance_report(runner::read_deals(run_dir),
                                              {baseline_buyer, baseline_seller});
        imbalance_ptr = &imbalance;
    }
    const auto written = runner::emit_reports(report, run_dir, imbalance_ptr);
    for (const auto& path : written) std::cerr << "wrote " << path.string() << "\n";
    return kExitOk;
}

int cmd_optimize(const std::string& out_dir, int steps, double eta, std::uint64_t seed,
                 int coverage_interval, const std::string& env_kind,
                 const std::string& catalog_path, const std::string& config_path,
                 const std::string& buyer, const std::string& seller,
                 const std::string& resume_path, int checkpoint_every,
                 const std::string& templates_dir) {
    bandit::Schedule schedule;
    schedule.total_steps = steps;
    schedule.learning_rate = eta;
    schedule.forced_coverage_interval = coverage_interval;

    std::filesystem::create_directories(out_dir);
    bandit::TrainOptions options;
    options.checkpoint_path = std::filesystem::path(out_dir) / "checkpoint.json";
    options.checkpoint_every = checkpoint_every;
    if (!resume_path.empty()) {
        std::ifstream in(resume_path);
        if (!in) throw runner::ConfigError("cannot open checkpoint: " + resume_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string rng_state;
        options.resume = bandit::state_from_json(buf.str(), &rng_state);
        options.resume_rng_state = rng_state;
    }

    bandit::Env env;
    long start_counter = options.resume ? options.resume->step : 0;
    std::optional<runner::ExperimentConfig> config;
    if (env_kind == "scripted") {
        if (catalog_path.empty())
            throw runner::ConfigError("--env scripted requires --catalog");
        env = runner::make_scripted_bandit_env(catalog::load_catalog_file(catalog_path), 30,
                                               start_counter);
    } else if (env_kind == "live") {
        if (config_path.empty() || buyer.empty() || seller.empty())
            throw runner::ConfigError("--env live requires --config, --buyer and --seller");
        config = runner::load_config(config_path);
        auto library = std::make_shared<prompts::PromptLibrary>(
            prompts::PromptLibrary::load(config->templates_dir));
        const auto products = catalog::sample_products(
            catalog::load_catalog_file(config->catalog_path), config->sample_count,
            config->sample_seed);
        // Keep the library alive inside the env closure.
        auto inner = runner::make_live_bandit_env(*config, *library, buyer, seller, products,
                                                  start_counter);
        env = [inner, library](int action, catalog::BudgetLevel level) {
            return inner(action, level);
        };
    } else {
        throw runner::ConfigError("--env must be \"scripted\" or \"live\"");
    }

    const auto result = bandit::train(env, schedule, bandit::RewardSpec{}, seed, options);

    {
        std::ofstream history(std::filesystem::path(out_dir) / "history.jsonl", std::ios::binary);
        history << bandit::history_to_jsonl(result.history);
    }
    {
        std::ofstream state(options.checkpoint_path, std::ios::binary);
        state << bandit::state_to_json(result.state);
    }
    const auto best = prompts::StrategyAction::from_index(result.best_action);
    {
        const auto dir = templates_dir.empty() ? std::string("templates") : templates_dir;
        const auto library = prompts::PromptLibrary::load(dir);
        std::ofstream prompt(std::filesystem::path(out_dir) / "best_prompt.txt", std::ios::binary);
        prompt << library.strategy_prompt_body(best);
    }
    std::cout << "best_action " << result.best_action << "\n";
    std::cerr << "history: " << (std::filesystem::path(out_dir) / "history.jsonl").string() << "\n";
    return kExitOk;
}

int cmd_prompts_show(const std::string& templates_dir, const std::string& role_name, int action,
                     const std::string& catalog_path, std::size_t product_index,
                     const std::string& budget_level) {
    const auto library = prompts::PromptLibrary::load(templates_dir);
    const auto role = prompts::prompt_role_from_string(role_name);
    if (!role) throw runner::ConfigError("unknown prompt role: " + role_name);

    catalog::Product product{"Toyota Camry", Money::parse("$26995"), Money::parse("$21596"),
                             "203-hp mid-size sedan with 8-speed automatic.",
                             "https://www.toyota.com/camry/", catalog::Category::motor_vehicle};
    if (!catalog_path.empty()) {
        const auto products = catalog::load_catalog_file(catalog_path);
        if (product_index >= products.size())
            throw runner::ConfigError("--product-index out of range");
        product = products[product_index];
    }
    const auto level = catalog::budget_level_from_string(budget_level);
    if (!level) throw runner::ConfigError("unknown budget level: " + budget_level);
    const Money budget = catalog::derive_budget(product, *level);

    std::string body;
    switch (*role) {
        case prompts::PromptRole::buyer_system:
            body = action >= 0
                       ? prompts::render({*role, library.strategy_prompt_body(
                                                     prompts::StrategyAction::from_index(action))},
                                         prompts::buyer_context(product, budget))
                       : prompts::render(library.get(*role), prompts::buyer_context(product, budget));
            break;
        case prompts::PromptRole::seller_system:
            body = prompts::render(library.get(*role), prompts::seller_context(product));
            break;
        case prompts::PromptRole::buyer_greeting:
            body = prompts::render(library.get(*role), prompts::greeting_context(product, budget));
            break;
        case prompts::PromptRole::judge:
            body = prompts::render(library.get(*role),
                                   prompts::judge_context("Could you do $70 instead?", std::nullopt));
            break;
        case prompts::PromptRole::analyst:
            body = prompts::render(
                library.get(*role),
                prompts::analyst_context("I can offer it to you for $25000."));
            break;
    }
    std::cout << body << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-to-agent price negotiation benchmark"};
    app.require_subcommand(1);

    // catalog validate
    auto* catalog_cmd = app.add_subcommand("catalog", "Catalog operations");
    auto* validate_cmd = catalog_cmd->add_subcommand("validate", "Validate and echo a catalog");
    std::string catalog_file;
    validate_cmd->add_option("file", catalog_file, "Product catalog JSON")->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "Execute an experiment matrix");
    std::string run_config;
    run_cmd->add_option("--config", run_config, "Experiment config JSON")->required();

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Aggregate a run directory into reports");
    std::string run_dir, reference_seller, rp_mode = "global", baseline_buyer, baseline_seller;
    metrics_cmd->add_option("run_dir", run_dir, "Run directory")->required();
    metrics_cmd->add_option("--reference-seller", reference_seller,
                            "Seller id used as the RP reference");
    metrics_cmd->add_option("--rp-mode", rp_mode, "RP normalization: global|category")
        ->check(CLI::IsMember({"global", "category"}));
    metrics_cmd->add_option("--baseline-buyer", baseline_buyer, "Imbalance baseline buyer id");
    metrics_cmd->add_option("--baseline-seller", baseline_seller, "Imbalance baseline seller id");

    // optimize
    auto* optimize_cmd = app.add_subcommand("optimize", "Online bandit prompt optimization");
    std::string opt_out = "bandit_out", opt_env = "scripted", opt_catalog, opt_config, opt_buyer,
                opt_seller, opt_resume, opt_templates = "templates";
    int opt_steps = 500, opt_coverage = 10, opt_checkpoint_every = 0;
    double opt_eta = 0.1;
    std::uint64_t opt_seed = 1;
    optimize_cmd->add_option("--steps", opt_steps, "Main-phase steps");
    optimize_cmd->add_option("--eta", opt_eta, "Learning rate");
    optimize_cmd->add_option("--seed", opt_seed, "RNG seed");
    optimize_cmd->add_option("--coverage-interval", opt_coverage, "Forced coverage interval N");
    optimize_cmd->add_option("--env", opt_env, "Episode runner: scripted|live")
        ->check(CLI::IsMember({"scripted", "live"}));
    optimize_cmd->add_option("--out", opt_out, "Output directory");
    optimize_cmd->add_option("--catalog", opt_catalog, "Catalog for the scripted env");
    optimize_cmd->add_option("--config", opt_config, "Experiment config for the live env");
    optimize_cmd->add_option("--buyer", opt_buyer, "Buyer agent name (live env)");
    optimize_cmd->add_option("--seller", opt_seller, "Seller agent name (live env)");
    optimize_cmd->add_option("--resume", opt_resume, "Checkpoint to resume from");
    optimize_cmd->add_option("--checkpoint-every", opt_checkpoint_every,
                             "Checkpoint interval in steps (0: only on failure)");
    optimize_cmd->add_option("--templates", opt_templates, "Template directory");

    // prompts show
    auto* prompts_cmd = app.add_subcommand("prompts", "Prompt template operations");
    auto* show_cmd = prompts_cmd->add_subcommand("show", "Render a role prompt");
    std::string show_role, show_templates = "templates", show_catalog, show_level = "mid";
    int show_action = -1;
    std::size_t show_product = 0;
    show_cmd->add_option("--role", show_role, "buyer_system|seller_system|buyer_greeting|judge|analyst")
        ->required();
    show_cmd->add_option("--action", show_action, "Strategy action index [0,96)");
    show_cmd->add_option("--templates", show_templates, "Template directory");
    show_cmd->add_option("--catalog", show_catalog, "Catalog supplying the demo product");
    show_cmd->add_option("--product-index", show_product, "Product index in the catalog");
    show_cmd->add_option("--budget-level", show_level, "Budget level for the demo context");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) return cmd_catalog_validate(catalog_file);
        if (run_cmd->parsed()) return cmd_run(run_config);
        if (metrics_cmd->parsed())
            return cmd_metrics(run_dir, reference_seller, rp_mode, baseline_buyer, baseline_seller);
        if (optimize_cmd->parsed())
            return cmd_optimize(opt_out, opt_steps, opt_eta, opt_seed, opt_coverage, opt_env,
                                opt_catalog, opt_config, opt_buyer, opt_seller, opt_resume,
                                opt_checkpoint_every, opt_templates);
        if (show_cmd->parsed())
            return cmd_prompts_show(show_templates, show_role, show_action, show_catalog,
                                    show_product, show_level);
        std::cerr << app.help() << "\n";
        return kExitConfig;
    } catch (const runner::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const catalog::CatalogError& e) {
        std::cerr << "catalog error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const prompts::PromptError& e) {
        std::cerr << "prompt error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const metrics::NoData& e) {
        std::cerr << "no data: " << e.what() << "\n";
        return kExitNoData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
