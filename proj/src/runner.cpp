#include "dealbench/runner.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace dealbench::runner {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunnerError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string hex64(std::uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

ExperimentConfig::Backend backend_from_string(const std::string& s, const char* field) {
    if (s == "rule_based") return ExperimentConfig::Backend::rule_based;
    if (s == "remote") return ExperimentConfig::Backend::remote;
    throw ConfigError(std::string(field) + " must be \"rule_based\" or \"remote\", got \"" + s +
                      "\"");
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.run_seed = j.value("run_seed", 1ull);
        cfg.catalog_path = j.at("catalog").get<std::string>();
        cfg.templates_dir = j.value("templates_dir", std::string("templates"));
        for (auto& [name, spec] : j.at("agents").items()) {
            AgentSpec agent;
            const std::string type = spec.at("type").get<std::string>();
            if (type == "scripted") {
                agent.kind = AgentSpec::Kind::scripted;
                agent.open_ratio = spec.value("open_ratio", 0.7);
                agent.step_ratio = spec.value("step_ratio", 0.05);
            } else if (type == "remote") {
                agent.kind = AgentSpec::Kind::remote;
                agent.endpoint.base_url = spec.at("base_url").get<std::string>();
                agent.endpoint.path = spec.value("path", std::string("/v1/chat/completions"));
                agent.endpoint.model_name = spec.at("model").get<std::string>();
                agent.endpoint.api_key_env = spec.value("api_key_env", std::string());
                agent.endpoint.timeout_s = spec.value("timeout_s", 60.0);
                agent.endpoint.max_retries = spec.value("max_retries", 3);
                agent.endpoint.temperature = spec.value("temperature", -1.0);
            } else {
                throw ConfigError("agent \"" + name + "\" has unknown type \"" + type + "\"");
            }
            cfg.agents[name] = agent;
        }
        cfg.buyer_models = j.at("buyer_models").get<std::vector<std::string>>();
        cfg.seller_models = j.at("seller_models").get<std::vector<std::string>>();
        if (j.contains("products_sample")) {
            cfg.sample_count = j["products_sample"].value("count", 50u);
            cfg.sample_seed = j["products_sample"].value("seed", 0ull);
        }
        if (j.contains("budget_levels")) {
            cfg.budget_levels.clear();
            for (const auto& level : j["budget_levels"]) {
                const auto parsed = catalog::budget_level_from_string(level.get<std::string>());
                if (!parsed)
                    throw ConfigError("unknown budget level \"" + level.get<std::string>() + "\"");
                cfg.budget_levels.push_back(*parsed);
            }
        }
        cfg.trials_per_cell = j.value("trials_per_cell", 1);
        cfg.t_max = j.value("t_max", 30);
        cfg.judge_backend = backend_from_string(j.value("judge_backend", "rule_based"),
                                                "judge_backend");
        cfg.analyst_backend = backend_from_string(j.value("analyst_backend", "rule_based"),
                                                  "analyst_backend");
        cfg.judge_endpoint = j.value("judge_endpoint", std::string());
        cfg.analyst_endpoint = j.value("analyst_endpoint", std::string());
        cfg.parallelism = j.value("parallelism", 1);
        cfg.rate_limit_per_min = j.value("rate_limit_per_min", 0.0);
        cfg.abort_threshold = j.value("abort_threshold", 0.05);
        cfg.output_dir = j.at("output_dir").get<std::string>();
        cfg.record_wire = j.value("record_wire", false);
        if (j.contains("deterministic_clock"))
            cfg.deterministic_clock = j["deterministic_clock"].get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    if (cfg.buyer_models.empty() || cfg.seller_models.empty())
        throw ConfigError("buyer_models and seller_models must be non-empty");
    for (const auto& name : cfg.buyer_models)
        if (!cfg.agents.count(name)) throw ConfigError("unknown buyer agent \"" + name + "\"");
    for (const auto& name : cfg.seller_models)
        if (!cfg.agents.count(name)) throw ConfigError("unknown seller agent \"" + name + "\"");
    if (cfg.judge_backend == ExperimentConfig::Backend::remote && !cfg.agents.count(cfg.judge_endpoint))
        throw ConfigError("judge_endpoint must name a configured agent");
    if (cfg.analyst_backend == ExperimentConfig::Backend::remote &&
        !cfg.agents.count(cfg.analyst_endpoint))
        throw ConfigError("analyst_endpoint must name a configured agent");
    if (cfg.trials_per_cell < 1) throw ConfigError("trials_per_cell must be >= 1");
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (cfg.t_max < 1) throw ConfigError("t_max must be >= 1");
    if (cfg.output_dir.empty()) throw ConfigError("output_dir must be set");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return config_from_json(read_file(path));
}

namespace {

json config_to_json(const ExperimentConfig& cfg) {
    json agents = json::object();
    for (const auto& [name, agent] : cfg.agents) {
        if (agent.kind == AgentSpec::Kind::scripted) {
            agents[name] = {{"type", "scripted"},
                            {"open_ratio", agent.open_ratio},
                            {"step_ratio", agent.step_ratio}};
        } else {
            agents[name] = {{"type", "remote"},
                            {"base_url", agent.endpoint.base_url},
                            {"path", agent.endpoint.path},
                            {"model", agent.endpoint.model_name},
                            {"api_key_env", agent.endpoint.api_key_env},
                            {"timeout_s", agent.endpoint.timeout_s},
                            {"max_retries", agent.endpoint.max_retries},
                            {"temperature", agent.endpoint.temperature}};
        }
    }
    json levels = json::array();
    for (const auto level : cfg.budget_levels) levels.push_back(catalog::to_string(level));
    json j{{"run_seed", cfg.run_seed},
           {"catalog", cfg.catalog_path},
           {"templates_dir", cfg.templates_dir},
           {"agents", agents},
           {"buyer_models", cfg.buyer_models},
           {"seller_models", cfg.seller_models},
           {"products_sample", {{"count", cfg.sample_count}, {"seed", cfg.sample_seed}}},
           {"budget_levels", levels},
           {"trials_per_cell", cfg.trials_per_cell},
           {"t_max", cfg.t_max},
           {"judge_backend",
            cfg.judge_backend == ExperimentConfig::Backend::rule_based ? "rule_based" : "remote"},
           {"analyst_backend",
            cfg.analyst_backend == ExperimentConfig::Backend::rule_based ? "rule_based" : "remote"},
           {"judge_endpoint", cfg.judge_endpoint},
           {"analyst_endpoint", cfg.analyst_endpoint},
           {"parallelism", cfg.parallelism},
           {"rate_limit_per_min", cfg.rate_limit_per_min},
           {"abort_threshold", cfg.abort_threshold},
           {"output_dir", cfg.output_dir},
           {"record_wire", cfg.record_wire}};
    if (cfg.deterministic_clock) j["deterministic_clock"] = *cfg.deterministic_clock;
    return j;
}

bool all_scripted(const ExperimentConfig& cfg) {
    if (cfg.judge_backend != ExperimentConfig::Backend::rule_based) return false;
    if (cfg.analyst_backend != ExperimentConfig::Backend::rule_based) return false;
    for (const auto& list : {cfg.buyer_models, cfg.seller_models})
        for (const auto& name : list)
            if (cfg.agents.at(name).kind != AgentSpec::Kind::scripted) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

std::vector<Job> plan_matrix(const ExperimentConfig& config,
                             const std::vector<catalog::Product>& products) {
    if (config.buyer_models.empty() || config.seller_models.empty() || products.empty() ||
        config.budget_levels.empty() || config.trials_per_cell < 1)
        throw EmptyMatrix("experiment matrix has an empty dimension");

    std::vector<Job> jobs;
    jobs.reserve(config.buyer_models.size() * config.seller_models.size() * products.size() *
                 config.budget_levels.size() * static_cast<std::size_t>(config.trials_per_cell));
    std::size_t index = 0;
    for (const auto& buyer : config.buyer_models)
        for (const auto& seller : config.seller_models)
            for (std::size_t p = 0; p < products.size(); ++p)
                for (const auto level : config.budget_levels)
                    for (int trial = 0; trial < config.trials_per_cell; ++trial) {
                        Job job;
                        job.index = index++;
                        job.buyer = buyer;
                        job.seller = seller;
                        job.product_index = p;
                        job.product_name = products[p].name;
                        job.budget_level = level;
                        job.trial = trial;
                        job.id = buyer + "|" + seller + "|" + std::to_string(p) + "|" +
                                 products[p].name + "|" + catalog::to_string(level) + "|" +
                                 std::to_string(trial);
                        job.seed = fnv1a64(std::to_string(config.run_seed) + "#" + job.id);
                        jobs.push_back(std::move(job));
                    }
    return jobs;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

struct Participants {
    std::unique_ptr<engine::Negotiator> buyer;
    std::unique_ptr<engine::Negotiator> seller;
    std::unique_ptr<engine::Judge> judge;
    std::unique_ptr<engine::Analyst> analyst;
};

std::unique_ptr<engine::Negotiator> make_negotiator(const std::string& name, const AgentSpec& spec,
                                                    const prompts::PromptLibrary& library,
                                                    agents::RateLimiter* limiter,
                                                    const agents::WireSink& sink) {
    if (spec.kind == AgentSpec::Kind::scripted)
        return std::make_unique<engine::ScriptedNegotiator>(name, spec.open_ratio,
                                                            spec.step_ratio);
    auto client = std::make_shared<agents::ChatClient>(spec.endpoint, agents::BackoffPolicy{},
                                                       limiter, sink);
    return std::make_unique<engine::LlmNegotiator>(name, std::move(client), library);
}

Participants make_participants(const ExperimentConfig& cfg, const Job& job,
                               const prompts::PromptLibrary& library,
                               agents::RateLimiter* limiter, const agents::WireSink& sink) {
    Participants p;
    p.buyer = make_negotiator(job.buyer, cfg.agents.at(job.buyer), library, limiter, sink);
    p.seller = make_negotiator(job.seller, cfg.agents.at(job.seller), library, limiter, sink);
    if (cfg.judge_backend == ExperimentConfig::Backend::rule_based) {
        p.judge = std::make_unique<engine::RuleJudge>();
    } else {
        auto client = std::make_shared<agents::ChatClient>(
            cfg.agents.at(cfg.judge_endpoint).endpoint, agents::BackoffPolicy{}, limiter, sink);
        p.judge = std::make_unique<engine::LlmJudge>(std::move(client), library);
    }
    if (cfg.analyst_backend == ExperimentConfig::Backend::rule_based) {
        p.analyst = std::make_unique<engine::RuleAnalyst>();
    } else {
        auto client = std::make_shared<agents::ChatClient>(
            cfg.agents.at(cfg.analyst_endpoint).endpoint, agents::BackoffPolicy{}, limiter, sink);
        p.analyst = std::make_unique<engine::LlmAnalyst>(std::move(client), library);
    }
    return p;
}

// Reads transcripts.jsonl, repairing a torn final line from an interrupted
// run. Returns the run_ids already persisted.
std::set<std::string> existing_run_ids(const std::filesystem::path& file) {
    std::set<std::string> ids;
    if (!std::filesystem::exists(file)) return ids;
    std::ifstream in(file, std::ios::binary);
    std::string line;
    std::uintmax_t good_bytes = 0;
    bool torn = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            good_bytes += 1;
            continue;
        }
        try {
            const auto t = engine::transcript_from_json(line);
            ids.insert(t.run_id);
            good_bytes += line.size() + 1;
        } catch (const std::exception&) {
            torn = true;
            break;
        }
    }
    if (torn) std::filesystem::resize_file(file, good_bytes);
    return ids;
}

}  // namespace

RunResult execute(const ExperimentConfig& config, const ProgressFn& progress) {
    const auto catalog_bytes = read_file(config.catalog_path);
    const auto all_products = catalog::load_catalog_text(catalog_bytes);
    const auto products =
        catalog::sample_products(all_products, config.sample_count, config.sample_seed);
    const auto library = prompts::PromptLibrary::load(config.templates_dir);
    const auto jobs = plan_matrix(config, products);

    const std::filesystem::path run_dir(config.output_dir);
    std::filesystem::create_directories(run_dir);

    // Manifest first; a resumed run must match it.
    const json config_json = config_to_json(config);
    const std::string config_hash = hex64(fnv1a64(config_json.dump()));
    const std::string catalog_hash = hex64(fnv1a64(catalog_bytes));
    json template_hashes = json::object();
    for (const auto& [name, hash] : library.content_hashes()) template_hashes[name] = hex64(hash);

    const auto manifest_path = run_dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        json existing = json::parse(read_file(manifest_path));
        if (existing.value("config_hash", "") != config_hash ||
            existing.value("catalog_hash", "") != catalog_hash ||
            existing.value("template_hashes", json::object()) != template_hashes)
            throw ConfigError("run directory " + run_dir.string() +
                              " was created from a different config/catalog/templates; refusing "
                              "to resume");
    } else {
        json sampled = json::array();
        for (const auto& p : products) sampled.push_back(p.name);
        json manifest{{"artifact", "dealbench"},
                      {"artifact_version", "0.1.0"},
                      {"config_hash", config_hash},
                      {"catalog_hash", catalog_hash},
                      {"template_hashes", template_hashes},
                      {"run_seed", config.run_seed},
                      {"sample_seed", config.sample_seed},
                      {"sampled_products", sampled},
                      {"plan_size", jobs.size()},
                      {"created_at_ms", engine::SystemClock().now_ms()},
                      {"config", config_json}};
        std::ofstream out(manifest_path);
        out << manifest.dump(2) << "\n";
    }

    const auto transcripts_path = run_dir / "transcripts.jsonl";
    const auto done = existing_run_ids(transcripts_path);

    std::vector<const Job*> pending;
    for (const auto& job : jobs)
        if (!done.count(job.id)) pending.push_back(&job);

    RunResult result;
    result.planned = jobs.size();
    result.skipped = done.size();
    result.run_dir = run_dir;

    const bool deterministic = config.deterministic_clock.value_or(all_scripted(config));

    agents::RateLimiter limiter(config.rate_limit_per_min);

    std::mutex wire_mu;
    std::ofstream wire_out;
    agents::WireSink sink;
    if (config.record_wire) {
        wire_out.open(run_dir / "wire.jsonl", std::ios::app);
        sink = [&](const std::string& line) {
            std::lock_guard lock(wire_mu);
            wire_out << line << "\n";
        };
    }

    std::ofstream out(transcripts_path, std::ios::app | std::ios::binary);
    if (!out) throw RunnerError("cannot open " + transcripts_path.string());

    std::mutex mu;
    std::map<std::size_t, std::string> ready;  // pending-sequence -> JSON line
    std::size_t write_next = 0;
    std::size_t written = 0;
    std::atomic<std::size_t> next_job{0};
    std::atomic<bool> stopped{false};
    std::vector<std::exception_ptr> failures;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next_job.fetch_add(1);
            if (i >= pending.size() || stopped.load()) break;
            const Job& job = *pending[i];
            std::string line;
            try {
                auto participants = make_participants(config, job, library, &limiter, sink);
                engine::NegotiationConfig episode_config;
                episode_config.product = products[job.product_index];
                episode_config.budget =
                    catalog::derive_budget(products[job.product_index], job.budget_level);
                episode_config.budget_level = job.budget_level;
                episode_config.t_max = config.t_max;
                episode_config.record_wire = config.record_wire;
                episode_config.run_id = job.id;
                episode_config.trial = job.trial;
                episode_config.seed = job.seed;

                engine::SystemClock system_clock;
                engine::LogicalClock logical_clock(static_cast<std::int64_t>(job.index) * 2);
                engine::Clock* clock =
                    deterministic ? static_cast<engine::Clock*>(&logical_clock)
                                  : static_cast<engine::Clock*>(&system_clock);

                const auto transcript =
                    engine::run_negotiation(*participants.buyer, *participants.seller,
                                            *participants.judge, *participants.analyst,
                                            episode_config, clock);
                line = engine::transcript_to_json(transcript);
            } catch (...) {
                std::lock_guard lock(mu);
                failures.push_back(std::current_exception());
                stopped.store(true);
                break;
            }

            std::lock_guard lock(mu);
            ready[i] = std::move(line);
            while (!stopped.load()) {
                auto it = ready.find(write_next);
                if (it == ready.end()) break;
                out << it->second << "\n";
                out.flush();
                ready.erase(it);
                ++write_next;
                ++written;
                if (progress && !progress(done.size() + written, jobs.size())) {
                    stopped.store(true);
                    break;
                }
            }
        }
    };

    if (config.parallelism <= 1 && pending.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        const int n_threads = std::min<int>(config.parallelism, static_cast<int>(pending.size()));
        threads.reserve(static_cast<std::size_t>(std::max(1, n_threads)));
        for (int i = 0; i < std::max(1, n_threads); ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    out.close();

    if (!failures.empty()) std::rethrow_exception(failures.front());

    // Final tallies over everything persisted so far.
    for (const auto& transcript : read_transcripts(run_dir)) {
        if (transcript.status == "completed")
            ++result.completed;
        else
            ++result.aborted;
    }
    const double abort_fraction =
        result.planned == 0 ? 0.0
                            : static_cast<double>(result.aborted) /
                                  static_cast<double>(result.planned);
    result.threshold_breached = abort_fraction > config.abort_threshold;
    return result;
}

std::vector<engine::Transcript> read_transcripts(const std::filesystem::path& run_dir) {
    std::vector<engine::Transcript> transcripts;
    const auto path = run_dir / "transcripts.jsonl";
    if (!std::filesystem::exists(path)) return transcripts;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        transcripts.push_back(engine::transcript_from_json(line));
    }
    return transcripts;
}

std::vector<metrics::DealRecord> read_deals(const std::filesystem::path& run_dir) {
    std::vector<metrics::DealRecord> deals;
    for (const auto& t : read_transcripts(run_dir)) deals.push_back(metrics::deal_from_transcript(t));
    return deals;
}

metrics::MetricsReport aggregate(const std::filesystem::path& run_dir,
                                 const AggregateOptions& options) {
    const auto deals = read_deals(run_dir);
    if (deals.empty()) throw metrics::NoData("no transcripts found under " + run_dir.string());
    return metrics::build_report(deals, options.metrics);
}

// ---------------------------------------------------------------------------
// Bandit environments
// ---------------------------------------------------------------------------

namespace {

// Scripted buyer variant shaped by a strategy action: the budget-emphasis
// axis sets its acceptance cap, the exit axes bound how many stalled seller
// turns it tolerates before walking away.
class StrategyScriptedBuyer : public engine::Negotiator {
public:
    StrategyScriptedBuyer(prompts::StrategyAction action, Money budget) : action_(action) {
        cap_ = action.budget_emphasis == prompts::BudgetEmphasis::hard ? budget
                                                                       : budget.mul_ratio(13, 10);
    }

    std::string id() const override { return "strategy_scripted_buyer"; }

    std::string next_message(const engine::NegotiatorView& view) override {
        if (view.opponent_offer && *view.opponent_offer <= cap_)
            return "Deal, I accept your offer of $" + view.opponent_offer->str() + ".";

        const int stalled = stalled_seller_turns(view);
        int patience = action_.exit_turns;
        if (action_.price_increase_policy == prompts::PriceIncreasePolicy::warn_then_end)
            ++patience;  // one warning turn before walking away
        if (stalled >= patience)
            return "This isn't working out. No deal, I'm walking away.";
        if (stalled == patience - 1 &&
            action_.price_increase_policy == prompts::PriceIncreasePolicy::warn_then_end)
            return "I need to see real movement on price, or we should wrap this up. Can you do "
                   "better?";

        const Money step =
            action_.concession_style == prompts::ConcessionStyle::tiny_steps
                ? view.product->retail_price.scale(0.008)
                : Money();
        Money planned = view.product->retail_price.scale(0.6) +
                        Money::from_cents(step.cents() * view.own_message_count);
        planned = std::min(planned, cap_);
        std::string message;
        if (view.own_message_count == 0)
            message = "Hello! I'm very interested in the " + view.product->name +
                      ". Would you consider $" + planned.str() + "?";
        else
            message = "I can do $" + planned.str() + ". Any room to move?";
        if (action_.non_price_ask) message += " Could you include free delivery?";
        return message;
    }

private:
    // Trailing run of seller turns whose price drop stayed under the
    // progress threshold. A first offer counts as progress.
    int stalled_seller_turns(const engine::NegotiatorView& view) const {
        const std::int64_t threshold = std::max<std::int64_t>(
            1, view.product->retail_price.scale(action_.progress_ratio()).cents());
        std::optional<Money> prev;
        int stalled = 0;
        for (const auto& turn : *view.history) {
            if (turn.speaker != engine::Speaker::seller) continue;
            bool progress = false;
            if (turn.extracted_price) {
                progress = !prev || (prev->cents() - turn.extracted_price->cents()) >= threshold;
                prev = turn.extracted_price;
            }
            stalled = progress ? 0 : stalled + 1;
        }
        return stalled;
    }

    prompts::StrategyAction action_;
    Money cap_;
};

}  // namespace

bandit::Env make_scripted_bandit_env(std::vector<catalog::Product> products, int t_max,
                                     long start_counter) {
    if (products.empty()) throw RunnerError("scripted bandit env needs a non-empty catalog");
    auto counter = std::make_shared<long>(start_counter);
    return [products = std::move(products), t_max, counter](int action_index,
                                                            catalog::BudgetLevel level) {
        const auto& product = products[static_cast<std::size_t>(*counter) % products.size()];
        ++*counter;
        const auto action = prompts::StrategyAction::from_index(action_index);
        const Money budget = catalog::derive_budget(product, level);

        StrategyScriptedBuyer buyer(action, budget);
        engine::ScriptedNegotiator seller("scripted_seller", 1.0, 0.03);
        engine::RuleJudge judge;
        engine::RuleAnalyst analyst;

        engine::NegotiationConfig config;
        config.product = product;
        config.budget = budget;
        config.budget_level = level;
        config.t_max = t_max;
        config.run_id = "bandit";

        engine::LogicalClock clock;
        const auto transcript =
            engine::run_negotiation(buyer, seller, judge, analyst, config, &clock);
        bandit::EpisodeFlags flags;
        if (transcript.outcome) {
            flags.over_budget = transcript.outcome->flags.over_budget;
            flags.below_wholesale = transcript.outcome->flags.below_wholesale;
            flags.over_retail = transcript.outcome->flags.over_retail;
            flags.deadlock = transcript.outcome->deadlock;
        } else {
            throw bandit::EnvFailure("scripted bandit episode aborted: " + transcript.abort_reason);
        }
        return flags;
    };
}

bandit::Env make_live_bandit_env(const ExperimentConfig& config,
                                 const prompts::PromptLibrary& library, std::string buyer,
                                 std::string seller, std::vector<catalog::Product> products,
                                 long start_counter) {
    if (products.empty()) throw RunnerError("live bandit env needs a non-empty catalog");
    if (!config.agents.count(buyer) || config.agents.at(buyer).kind != AgentSpec::Kind::remote)
        throw ConfigError("live bandit env requires a remote buyer agent");
    if (!config.agents.count(seller))
        throw ConfigError("live bandit env requires a configured seller agent");

    auto counter = std::make_shared<long>(start_counter);
    auto limiter = std::make_shared<agents::RateLimiter>(config.rate_limit_per_min);
    return [&library, config, buyer = std::move(buyer), seller = std::move(seller),
            products = std::move(products), counter, limiter](int action_index,
                                                              catalog::BudgetLevel level) {
        const auto& product = products[static_cast<std::size_t>(*counter) % products.size()];
        ++*counter;
        const auto action = prompts::StrategyAction::from_index(action_index);
        const Money budget = catalog::derive_budget(product, level);

        auto buyer_client = std::make_shared<agents::ChatClient>(
            config.agents.at(buyer).endpoint, agents::BackoffPolicy{}, limiter.get());
        engine::LlmNegotiator buyer_agent(buyer, std::move(buyer_client), library, action);
        auto seller_agent = make_negotiator(seller, config.agents.at(seller), library,
                                            limiter.get(), nullptr);

        std::unique_ptr<engine::Judge> judge;
        if (config.judge_backend == ExperimentConfig::Backend::remote) {
            auto client = std::make_shared<agents::ChatClient>(
                config.agents.at(config.judge_endpoint).endpoint, agents::BackoffPolicy{},
                limiter.get());
            judge = std::make_unique<engine::LlmJudge>(std::move(client), library);
        } else {
            judge = std::make_unique<engine::RuleJudge>();
        }
        std::unique_ptr<engine::Analyst> analyst;
        if (config.analyst_backend == ExperimentConfig::Backend::remote) {
            auto client = std::make_shared<agents::ChatClient>(
                config.agents.at(config.analyst_endpoint).endpoint, agents::BackoffPolicy{},
                limiter.get());
            analyst = std::make_unique<engine::LlmAnalyst>(std::move(client), library);
        } else {
            analyst = std::make_unique<engine::RuleAnalyst>();
        }

        engine::NegotiationConfig episode_config;
        episode_config.product = product;
        episode_config.budget = budget;
        episode_config.budget_level = level;
        episode_config.t_max = config.t_max;
        episode_config.run_id = "bandit_live";

        const auto transcript = engine::run_negotiation(buyer_agent, *seller_agent, *judge,
                                                        *analyst, episode_config);
        bandit::EpisodeFlags flags;
        if (!transcript.outcome)
            throw bandit::EnvFailure("live bandit episode aborted: " + transcript.abort_reason);
        flags.over_budget = transcript.outcome->flags.over_budget;
        flags.below_wholesale = transcript.outcome->flags.below_wholesale;
        flags.over_retail = transcript.outcome->flags.over_retail;
        flags.deadlock = transcript.outcome->deadlock;
        return flags;
    };
}

}  // namespace dealbench::runner
