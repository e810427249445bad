#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "dealbench/catalog.hpp"
#include "dealbench/engine.hpp"
#include "dealbench/money.hpp"

namespace dealbench::metrics {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientPopulation : MetricsError {
    using MetricsError::MetricsError;
};
struct EmptyIntersection : MetricsError {
    using MetricsError::MetricsError;
};
struct NoData : MetricsError {
    using MetricsError::MetricsError;
};

// ---------------------------------------------------------------------------
// Per-negotiation facts
// ---------------------------------------------------------------------------

struct DealRecord {
    std::string product_name;
    catalog::Category category = catalog::Category::other;
    Money retail_price;
    Money wholesale_price;
    Money beta;
    catalog::BudgetLevel budget_level = catalog::BudgetLevel::retail;
    int trial = 0;
    std::optional<Money> final_price;
    bool accepted = false;
    bool deadlock = false;
    bool aborted = false;
    std::string buyer_id;
    std::string seller_id;
    engine::OutcomeFlags flags;

    /// Shared-case identity across pairings: same product, budget and trial.
    std::string case_key() const;
};

DealRecord deal_from_transcript(const engine::Transcript& t);

// ---------------------------------------------------------------------------
// Core metrics
// ---------------------------------------------------------------------------

/// Price reduction rate (p_r - p_aT) / p_r; negative when overpaying.
double prr(Money retail_price, Money final_price);

struct SellerAggregate {
    Money total_profit;                      // sum of (p_aT - p_w) over accepted deals
    std::optional<double> relative_profit;   // TP / TP_min; absent when reference invalid
    double deal_rate = 0.0;                  // |N_deal| / |N|
    std::optional<double> profit_rate;       // mean (p_aT - p_w)/p_w; absent with zero deals
    std::size_t n = 0;
    std::size_t n_deal = 0;
};

// tp_min: reference total profit for RP. Non-positive or absent reference
// leaves relative_profit unset (Eq. 2 presumes a positive reference).
SellerAggregate aggregate_seller(const std::vector<DealRecord>& deals,
                                 std::optional<Money> tp_min);

struct AnomalyRates {
    double obr = 0.0;  // accepted above budget / all negotiations
    double owr = 0.0;  // accepted below wholesale / all negotiations
    std::optional<double> opr;            // accepted above retail / accepted deals
    std::optional<double> opr_budget_ok;  // same, restricted to beta >= retail
    double dlr = 0.0;  // deadlocks / all negotiations
    std::size_t n = 0;
    std::size_t n_deal = 0;
    std::size_t n_over_budget = 0;
    std::size_t n_below_wholesale = 0;
    std::size_t n_over_retail = 0;
    std::size_t n_over_retail_budget_ok = 0;
    std::size_t n_deadlock = 0;
};

AnomalyRates anomaly_rates(const std::vector<DealRecord>& deals);

// ---------------------------------------------------------------------------
// Composite scores (population z-scores)
// ---------------------------------------------------------------------------

/// Population z-scores; a zero-variance component maps to all-zero scores.
std::vector<double> zscores(const std::vector<double>& values);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct NcsInput {
    double prr_buyer = 0.0;
    double prr_seller = 0.0;  // reversed internally as 1 - prr_seller
    double rp = 0.0;
};

/// Negotiation capacity score: mean z-score of (PRR_buyer, 1-PRR_seller, RP).
std::map<std::string, double> ncs(const std::map<std::string, NcsInput>& per_model);

struct RiskInput {
    double obr = 0.0;
    double owr = 0.0;
    double opr = 0.0;
    double dlr = 0.0;
};

/// Risk index: mean z-score of the four anomaly rates (higher = riskier).
std::map<std::string, double> risk_index(const std::map<std::string, RiskInput>& per_model);

// ---------------------------------------------------------------------------
// Imbalance report (shared successful cases across pairings)
// ---------------------------------------------------------------------------

struct ImbalanceRow {
    std::string buyer_id;
    std::string seller_id;
    double avg_payment = 0.0;            // dollars, mean over shared cases
    std::optional<double> delta_pct;     // vs. baseline; absent on the baseline row
    std::string impact;
    std::size_t shared_cases = 0;
};

// Restricts to cases every compared pairing closed successfully; throws
// EmptyIntersection when none exist. Pairings default to every (buyer,
// seller) pair present in the records.
std::vector<ImbalanceRow> imbalance_report(
    const std::vector<DealRecord>& deals,
    const std::pair<std::string, std::string>& baseline_pair,
    std::vector<std::pair<std::string, std::string>> pairings = {});

// ---------------------------------------------------------------------------
// Cell-level report
// ---------------------------------------------------------------------------

struct CellKey {
    std::string buyer_id;
    std::string seller_id;
    catalog::BudgetLevel budget_level = catalog::BudgetLevel::retail;
    auto operator<=>(const CellKey&) const = default;
};

struct CellMetrics {
    std::optional<double> prr_mean;  // over accepted deals
    SellerAggregate seller;
    AnomalyRates anomalies;
};

struct ModelSummary {
    Money total_profit;                     // as seller
    std::optional<double> relative_profit;  // as seller, per the chosen RP mode
    double deal_rate = 0.0;                 // as seller
    std::optional<double> profit_rate;      // as seller
    std::optional<double> prr_buyer;        // mean PRR over accepted deals as buyer
    std::optional<double> prr_seller;       // mean PRR over accepted deals as seller
    double obr = 0.0;                       // as buyer
    double owr = 0.0;                       // as seller
    std::optional<double> opr;              // as buyer
    double dlr = 0.0;                       // as buyer
};

enum class RpMode { global, per_category };

struct ReportOptions {
    std::optional<std::string> reference_seller;  // default: minimum positive TP
    RpMode rp_mode = RpMode::global;
};

struct MetricsReport {
    std::map<CellKey, CellMetrics> cells;
    std::map<std::string, ModelSummary> models;
    std::map<std::string, double> ncs_scores;         // present with >= 2 eligible models
    std::map<std::string, double> risk_scores;
    std::optional<double> ncs_risk_pearson;
    std::size_t n_total = 0;
    std::size_t n_aborted = 0;
};

/// Aggregates non-aborted records into per-cell and per-model tables.
MetricsReport build_report(const std::vector<DealRecord>& deals, const ReportOptions& options = {});

}  // namespace dealbench::metrics
