#include "dealbench/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace dealbench::bandit {

namespace {

using nlohmann::json;

// rng() folded into [0, 1); avoids distribution objects so draws are
// identical across standard libraries.
double next_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t next_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(n)) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return static_cast<std::size_t>(r % n);
    }
}

}  // namespace

std::vector<int> BanditState::active_or_all() const {
    if (!active_set.empty()) return active_set;
    std::vector<int> all(kArmCount);
    std::iota(all.begin(), all.end(), 0);
    return all;
}

std::vector<double> softmax_policy(const std::vector<double>& theta,
                                   const std::vector<int>& subset) {
    if (subset.empty()) throw BanditError("softmax over an empty subset");
    double max_theta = theta[subset.front()];
    for (int i : subset) max_theta = std::max(max_theta, theta[i]);
    std::vector<double> probs(subset.size());
    double total = 0.0;
    for (std::size_t k = 0; k < subset.size(); ++k) {
        probs[k] = std::exp(theta[subset[k]] - max_theta);
        total += probs[k];
    }
    for (double& p : probs) p /= total;
    return probs;
}

double compute_reward(const EpisodeFlags& flags, catalog::BudgetLevel level,
                      const RewardSpec& spec) {
    double r = 0.0;
    if (level == catalog::BudgetLevel::high && flags.over_retail) r -= spec.w_overpay_high;
    if (level == catalog::BudgetLevel::low && flags.over_budget) r -= spec.w_oob_low;
    if (flags.deadlock) r -= spec.w_deadlock;
    return r;
}

void update(BanditState& state, int action, double reward, double eta) {
    const auto active = state.active_or_all();
    const auto pos = std::find(active.begin(), active.end(), action);
    if (pos == active.end())
        throw InactiveArm("arm " + std::to_string(action) + " is not in the active set");

    state.baseline = 0.9 * state.baseline + 0.1 * reward;
    const double advantage = reward - state.baseline;
    const auto probs = softmax_policy(state.theta, active);
    const double pi_a = probs[static_cast<std::size_t>(pos - active.begin())];
    state.theta[action] += eta * advantage * (1.0 - pi_a);
    ++state.pull_counts[action];
    ++state.step;
}

std::string to_string(SelectMode mode) {
    switch (mode) {
        case SelectMode::forced: return "forced";
        case SelectMode::explore: return "explore";
        case SelectMode::exploit: break;
    }
    return "exploit";
}

int select_action(const BanditState& state, double eps, int forced_interval, std::mt19937_64& rng,
                  SelectMode* mode_out) {
    const auto active = state.active_or_all();
    if (forced_interval > 0 && state.step % forced_interval == 0) {
        int least = active.front();
        for (int arm : active)
            if (state.pull_counts[arm] < state.pull_counts[least]) least = arm;
        if (mode_out != nullptr) *mode_out = SelectMode::forced;
        return least;
    }
    if (next_double(rng) < eps) {
        if (mode_out != nullptr) *mode_out = SelectMode::explore;
        return active[next_index(rng, active.size())];
    }
    const auto probs = softmax_policy(state.theta, active);
    const double u = next_double(rng);
    double cum = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
        cum += probs[k];
        if (u < cum) {
            if (mode_out != nullptr) *mode_out = SelectMode::exploit;
            return active[k];
        }
    }
    if (mode_out != nullptr) *mode_out = SelectMode::exploit;
    return active.back();
}

namespace {

// Top-k arms by theta within the candidate set; ties resolved by pull count
// (more evidence first) then by index.
std::vector<int> top_k(const BanditState& state, std::vector<int> candidates, int k) {
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        if (state.theta[a] != state.theta[b]) return state.theta[a] > state.theta[b];
        if (state.pull_counts[a] != state.pull_counts[b])
            return state.pull_counts[a] > state.pull_counts[b];
        return a < b;
    });
    candidates.resize(std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(k)));
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

void write_checkpoint(const TrainOptions& options, const BanditState& state,
                      const std::string& rng_state) {
    if (options.checkpoint_path.empty()) return;
    std::ofstream out(options.checkpoint_path);
    out << state_to_json(state, rng_state);
}

}  // namespace

TrainResult train(const Env& env, const Schedule& schedule, const RewardSpec& spec,
                  std::uint64_t seed, const TrainOptions& options) {
    TrainResult result;
    std::mt19937_64 rng(seed);

    BanditState& state = result.state;
    if (options.resume) {
        state = *options.resume;
        if (!options.resume_rng_state.empty()) {
            std::istringstream in(options.resume_rng_state);
            in >> rng;
        }
    } else {
        state.rng_seed = seed;
    }

    const long warmup_total = 2l * kArmCount;
    auto rng_text = [&rng] {
        std::ostringstream out;
        out << rng;
        return out.str();
    };
    // Captured at the top of each iteration so a failure checkpoint replays
    // the whole iteration, including its budget/selection draws.
    std::string iteration_rng_snapshot = rng_text();
    auto run_episode = [&](int action, catalog::BudgetLevel level, const std::string& phase,
                           double eps, const std::string& mode) {
        EpisodeFlags flags;
        try {
            flags = env(action, level);
        } catch (const std::exception& e) {
            write_checkpoint(options, state, iteration_rng_snapshot);
            throw EnvFailure("episode runner failed at step " + std::to_string(state.step) + ": " +
                             e.what());
        }
        const double reward = compute_reward(flags, level, spec);
        update(state, action, reward, schedule.learning_rate);
        HistoryEntry entry;
        entry.step = state.step;  // post-update step counter
        entry.phase = phase;
        entry.action = action;
        entry.budget = level;
        entry.reward = reward;
        entry.baseline = state.baseline;
        entry.eps = eps;
        entry.active_set_size = static_cast<int>(state.active_or_all().size());
        entry.mode = mode;
        result.history.push_back(std::move(entry));
        if (options.checkpoint_every > 0 && state.step % options.checkpoint_every == 0)
            write_checkpoint(options, state, rng_text());
    };

    // Warmup: every arm once per budget condition, full updates applied.
    while (state.step < warmup_total) {
        const int arm = static_cast<int>(state.step / 2);
        const auto level =
            state.step % 2 == 0 ? catalog::BudgetLevel::high : catalog::BudgetLevel::low;
        run_episode(arm, level, "warmup", 0.0, "warmup");
    }

    const long main_steps = schedule.total_steps;
    const long shrink_at =
        static_cast<long>(std::floor(schedule.shrink_at_fraction * static_cast<double>(main_steps)));
    long main_index = state.step - warmup_total;

    if (main_index == 0)
        state.active_set = top_k(state, state.active_or_all(), schedule.k_initial);

    for (; main_index < main_steps; ++main_index) {
        iteration_rng_snapshot = rng_text();
        if (main_index == shrink_at)
            state.active_set = top_k(state, state.active_set, schedule.k_final);

        const double progress =
            main_steps > 1 ? static_cast<double>(main_index) / static_cast<double>(main_steps - 1)
                           : 1.0;
        const double eps =
            schedule.eps_start + (schedule.eps_end - schedule.eps_start) * progress;

        catalog::BudgetLevel level;
        if (progress < schedule.low_budget_phase_fraction) {
            level = catalog::BudgetLevel::low;
        } else {
            level = next_double(rng) < schedule.high_budget_prob_phase2
                        ? catalog::BudgetLevel::high
                        : catalog::BudgetLevel::low;
        }

        SelectMode mode = SelectMode::exploit;
        const int action =
            select_action(state, eps, schedule.forced_coverage_interval, rng, &mode);
        run_episode(action, level, "main", eps, to_string(mode));
    }

    result.best_action = static_cast<int>(
        std::max_element(state.theta.begin(), state.theta.end()) - state.theta.begin());
    return result;
}

std::string state_to_json(const BanditState& state, const std::string& rng_state) {
    json j;
    j["theta"] = state.theta;
    j["baseline"] = state.baseline;
    j["step"] = state.step;
    j["pull_counts"] = state.pull_counts;
    j["active_set"] = state.active_set;
    j["rng_seed"] = state.rng_seed;
    j["rng_state"] = rng_state;
    return j.dump();
}

BanditState state_from_json(const std::string& text, std::string* rng_state) {
    json j = json::parse(text);
    BanditState state;
    state.theta = j.at("theta").get<std::vector<double>>();
    state.baseline = j.at("baseline").get<double>();
    state.step = j.at("step").get<long>();
    state.pull_counts = j.at("pull_counts").get<std::vector<long>>();
    state.active_set = j.at("active_set").get<std::vector<int>>();
    state.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (rng_state != nullptr) *rng_state = j.value("rng_state", "");
    if (state.theta.size() != kArmCount || state.pull_counts.size() != kArmCount)
        throw BanditError("checkpoint arm count mismatch");
    return state;
}

std::string history_to_jsonl(const std::vector<HistoryEntry>& history) {
    std::string out;
    for (const auto& e : history) {
        json j{{"step", e.step},
               {"phase", e.phase},
               {"action", e.action},
               {"budget", catalog::to_string(e.budget)},
               {"reward", e.reward},
               {"baseline", e.baseline},
               {"eps", e.eps},
               {"active_set_size", e.active_set_size},
               {"mode", e.mode}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace dealbench::bandit
