#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dealbench/catalog.hpp"

namespace dealbench::bandit {

struct BanditError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InactiveArm : BanditError {
    using BanditError::BanditError;
};
struct EnvFailure : BanditError {
    using BanditError::BanditError;
};

inline constexpr int kArmCount = 96;

struct RewardSpec {
    double w_overpay_high = 2.0;  // high budget, accepted above retail
    double w_oob_low = 1.0;       // low budget, accepted above budget
    double w_deadlock = 1.0;
};

struct Schedule {
    int total_steps = 500;               // main-phase steps (after warmup)
    double eps_start = 0.10;
    double eps_end = 0.02;
    double low_budget_phase_fraction = 0.5;
    double high_budget_prob_phase2 = 0.7;
    int k_initial = 24;
    int k_final = 12;
    double shrink_at_fraction = 2.0 / 3.0;
    int forced_coverage_interval = 10;
    double learning_rate = 0.1;
};

struct BanditState {
    std::vector<double> theta = std::vector<double>(kArmCount, 0.0);
    double baseline = 0.0;  // EMA of rewards: b_t = 0.9 b_{t-1} + 0.1 r_t
    long step = 0;
    std::vector<long> pull_counts = std::vector<long>(kArmCount, 0);
    std::vector<int> active_set;  // sorted arm indices; empty means "all arms"
    std::uint64_t rng_seed = 0;

    std::vector<int> active_or_all() const;
};

struct EpisodeFlags {
    bool over_budget = false;
    bool below_wholesale = false;
    bool over_retail = false;
    bool deadlock = false;
};

/// Maps one prompt configuration and budget condition to episode flags.
using Env = std::function<EpisodeFlags(int action, catalog::BudgetLevel level)>;

/// Numerically stable softmax restricted to a subset of arms.
std::vector<double> softmax_policy(const std::vector<double>& theta,
                                   const std::vector<int>& subset);

// r = -w1*[high & over_retail] - w2*[low & over_budget] - w3*[deadlock];
// penalties stack when they co-occur.
double compute_reward(const EpisodeFlags& flags, catalog::BudgetLevel level,
                      const RewardSpec& spec);

// One policy-gradient step: baseline EMA first, advantage against the updated
// baseline, then theta[a] += eta * A * (1 - pi_a) with pi evaluated over the
// active set before the change. Only the chosen arm moves.
void update(BanditState& state, int action, double reward, double eta);

enum class SelectMode { forced, explore, exploit };
std::string to_string(SelectMode mode);

// Forced coverage of the least-sampled active arm when step % interval == 0
// (ties to the lowest index); otherwise an eps-mixture of uniform exploration
// and softmax sampling over the active set.
int select_action(const BanditState& state, double eps, int forced_interval, std::mt19937_64& rng,
                  SelectMode* mode_out = nullptr);

struct HistoryEntry {
    long step = 0;
    std::string phase;  // warmup | main
    int action = 0;
    catalog::BudgetLevel budget = catalog::BudgetLevel::low;
    double reward = 0.0;
    double baseline = 0.0;
    double eps = 0.0;
    int active_set_size = kArmCount;
    std::string mode;  // warmup | forced | explore | exploit
};

struct TrainResult {
    int best_action = 0;  // argmax theta over all arms
    std::vector<HistoryEntry> history;
    BanditState state;
};

struct TrainOptions {
    std::filesystem::path checkpoint_path;  // written on env failure / periodically
    int checkpoint_every = 0;               // 0: only on failure
    std::optional<BanditState> resume;      // continue from a checkpoint
    std::string resume_rng_state;           // serialized mt19937_64 from the checkpoint
};

// Warmup samples every arm once under high and once under low budget with
// full updates, then runs the scheduled main phase: low budgets only in the
// first half, high with probability 0.7 afterwards; epsilon annealed linearly
// from 0.10 to 0.02; active set restricted to the top-24 thetas at the main
// phase start and to the top-12 after two-thirds of progress.
TrainResult train(const Env& env, const Schedule& schedule, const RewardSpec& spec,
                  std::uint64_t seed, const TrainOptions& options = {});

std::string state_to_json(const BanditState& state, const std::string& rng_state = "");
BanditState state_from_json(const std::string& text, std::string* rng_state = nullptr);

std::string history_to_jsonl(const std::vector<HistoryEntry>& history);

}  // namespace dealbench::bandit
