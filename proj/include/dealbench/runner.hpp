#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dealbench/agents.hpp"
#include "dealbench/bandit.hpp"
#include "dealbench/catalog.hpp"
#include "dealbench/engine.hpp"
#include "dealbench/metrics.hpp"
#include "dealbench/prompts.hpp"

namespace dealbench::runner {

struct RunnerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : RunnerError {
    using RunnerError::RunnerError;
};
struct EmptyMatrix : RunnerError {
    using RunnerError::RunnerError;
};

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct AgentSpec {
    enum class Kind { scripted, remote };
    Kind kind = Kind::scripted;
    // scripted
    double open_ratio = 0.7;
    double step_ratio = 0.05;
    // remote
    agents::AgentEndpoint endpoint;
};

struct ExperimentConfig {
    std::uint64_t run_seed = 1;
    std::string catalog_path;
    std::string templates_dir = "templates";
    std::map<std::string, AgentSpec> agents;
    std::vector<std::string> buyer_models;
    std::vector<std::string> seller_models;
    std::size_t sample_count = 50;
    std::uint64_t sample_seed = 0;
    std::vector<catalog::BudgetLevel> budget_levels{catalog::kAllBudgetLevels.begin(),
                                                    catalog::kAllBudgetLevels.end()};
    int trials_per_cell = 1;
    int t_max = 30;
    enum class Backend { rule_based, remote };
    Backend judge_backend = Backend::rule_based;
    Backend analyst_backend = Backend::rule_based;
    std::string judge_endpoint;    // agent name, for remote backends
    std::string analyst_endpoint;
    int parallelism = 1;
    double rate_limit_per_min = 0.0;
    double abort_threshold = 0.05;
    std::string output_dir;
    bool record_wire = false;
    std::optional<bool> deterministic_clock;  // default: auto (true for all-scripted runs)
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view data);

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

struct Job {
    std::size_t index = 0;
    std::string id;  // injective over the plan
    std::string buyer;
    std::string seller;
    std::size_t product_index = 0;  // into the sampled product list
    std::string product_name;
    catalog::BudgetLevel budget_level = catalog::BudgetLevel::retail;
    int trial = 0;
    std::uint64_t seed = 0;
};

// Full cross of buyers x sellers x sampled products x budget levels x trials,
// with a stable per-job seed derived from the run seed and the job identity.
std::vector<Job> plan_matrix(const ExperimentConfig& config,
                             const std::vector<catalog::Product>& products);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct RunResult {
    std::size_t planned = 0;
    std::size_t completed = 0;
    std::size_t aborted = 0;
    std::size_t skipped = 0;  // already present before this invocation (resume)
    std::filesystem::path run_dir;
    bool threshold_breached = false;
};

/// Return false to stop after the current write (graceful shutdown).
using ProgressFn = std::function<bool(std::size_t written, std::size_t total)>;

// Runs the plan with a bounded worker pool and a shared rate limiter.
// Transcripts are appended to transcripts.jsonl in plan order (a reorder
// buffer keeps the file a deterministic prefix), so the artifact bytes do not
// depend on parallelism and interrupted runs resume by skipping persisted
// job ids. The manifest is written before any job runs.
RunResult execute(const ExperimentConfig& config, const ProgressFn& progress = nullptr);

std::vector<engine::Transcript> read_transcripts(const std::filesystem::path& run_dir);
std::vector<metrics::DealRecord> read_deals(const std::filesystem::path& run_dir);

// ---------------------------------------------------------------------------
// Aggregation and reports
// ---------------------------------------------------------------------------

enum class ReportFormat { csv, markdown, long_csv };

struct AggregateOptions {
    metrics::ReportOptions metrics;
    std::optional<std::pair<std::string, std::string>> baseline_pair;
};

metrics::MetricsReport aggregate(const std::filesystem::path& run_dir,
                                 const AggregateOptions& options = {});

std::string cells_csv(const metrics::MetricsReport& report);
std::string long_csv(const metrics::MetricsReport& report);
std::string anomaly_markdown(const metrics::MetricsReport& report);
std::string seller_summary_markdown(const metrics::MetricsReport& report);
std::string ncs_risk_csv(const metrics::MetricsReport& report);
std::string imbalance_markdown(const std::vector<metrics::ImbalanceRow>& rows);

/// Writes every applicable report file under <run_dir>/reports.
std::vector<std::filesystem::path> emit_reports(const metrics::MetricsReport& report,
                                                const std::filesystem::path& run_dir,
                                                const std::vector<metrics::ImbalanceRow>* imbalance =
                                                    nullptr);

// ---------------------------------------------------------------------------
// Bandit environments for `optimize`
// ---------------------------------------------------------------------------

// Deterministic scripted environment: the strategy action shapes a scripted
// buyer (budget emphasis sets the acceptance cap, exit axes bound how long it
// tolerates a stalled seller) against a fixed scripted seller. Products are
// cycled from the catalog.
bandit::Env make_scripted_bandit_env(std::vector<catalog::Product> products, int t_max = 30,
                                     long start_counter = 0);

/// Live environment: remote negotiation episodes with the strategy prompt.
bandit::Env make_live_bandit_env(const ExperimentConfig& config,
                                 const prompts::PromptLibrary& library, std::string buyer,
                                 std::string seller, std::vector<catalog::Product> products,
                                 long start_counter = 0);

}  // namespace dealbench::runner
