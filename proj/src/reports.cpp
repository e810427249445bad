#include <cstdio>
#include <fstream>

#include "dealbench/runner.hpp"

namespace dealbench::runner {

namespace {

// Column contract: money with 2 decimals, rates with 4; undefined values
// stay empty.
std::string rate(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

std::string rate(const std::optional<double>& value) { return value ? rate(*value) : ""; }

std::string money2(double dollars) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", dollars);
    return buf;
}

}  // namespace

std::string cells_csv(const metrics::MetricsReport& report) {
    std::string out =
        "buyer_id,seller_id,budget_level,n,n_deal,n_over_budget,n_below_wholesale,"
        "n_over_retail,n_over_retail_budget_ok,n_deadlock,prr_mean,deal_rate,profit_rate,"
        "total_profit,relative_profit,obr,owr,opr,opr_budget_conditioned,dlr\n";
    for (const auto& [key, cell] : report.cells) {
        const auto& a = cell.anomalies;
        out += key.buyer_id + "," + key.seller_id + "," + catalog::to_string(key.budget_level) +
               "," + std::to_string(a.n) + "," + std::to_string(a.n_deal) + "," +
               std::to_string(a.n_over_budget) + "," + std::to_string(a.n_below_wholesale) + "," +
               std::to_string(a.n_over_retail) + "," + std::to_string(a.n_over_retail_budget_ok) +
               "," + std::to_string(a.n_deadlock) + "," + rate(cell.prr_mean) + "," +
               rate(cell.seller.deal_rate) + "," + rate(cell.seller.profit_rate) + "," +
               cell.seller.total_profit.str() + "," + rate(cell.seller.relative_profit) + "," +
               rate(a.obr) + "," + rate(a.owr) + "," + rate(a.opr) + "," +
               rate(a.opr_budget_ok) + "," + rate(a.dlr) + "\n";
    }
    return out;
}

std::string long_csv(const metrics::MetricsReport& report) {
    std::string out = "buyer_id,seller_id,budget_level,metric,value\n";
    for (const auto& [key, cell] : report.cells) {
        const std::string prefix = key.buyer_id + "," + key.seller_id + "," +
                                   catalog::to_string(key.budget_level) + ",";
        auto emit = [&](const char* metric, const std::string& value) {
            if (!value.empty()) out += prefix + metric + "," + value + "\n";
        };
        emit("prr_mean", rate(cell.prr_mean));
        emit("deal_rate", rate(cell.seller.deal_rate));
        emit("profit_rate", rate(cell.seller.profit_rate));
        emit("total_profit", cell.seller.total_profit.str());
        emit("relative_profit", rate(cell.seller.relative_profit));
        emit("obr", rate(cell.anomalies.obr));
        emit("owr", rate(cell.anomalies.owr));
        emit("opr", rate(cell.anomalies.opr));
        emit("opr_budget_conditioned", rate(cell.anomalies.opr_budget_ok));
        emit("dlr", rate(cell.anomalies.dlr));
    }
    return out;
}

std::string anomaly_markdown(const metrics::MetricsReport& report) {
    std::string out = "| Model | Out-of-Budget | Out-of-Wholesale | Overpayment | Deadlock |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& [model, summary] : report.models) {
        out += "| " + model + " | " + rate(summary.obr) + " | " + rate(summary.owr) + " | " +
               (summary.opr ? rate(*summary.opr) : std::string("-")) + " | " + rate(summary.dlr) +
               " |\n";
    }
    return out;
}

std::string seller_summary_markdown(const metrics::MetricsReport& report) {
    std::string out =
        "| Seller | Total Profit($) | Relative Profit | Deal Rate | Profit Rate | PRR (as "
        "seller) |\n|---|---|---|---|---|---|\n";
    for (const auto& [model, summary] : report.models) {
        out += "| " + model + " | " + summary.total_profit.str() + " | " +
               (summary.relative_profit ? rate(*summary.relative_profit) : std::string("-")) +
               " | " + rate(summary.deal_rate) + " | " +
               (summary.profit_rate ? rate(*summary.profit_rate) : std::string("-")) + " | " +
               (summary.prr_seller ? rate(*summary.prr_seller) : std::string("-")) + " |\n";
    }
    return out;
}

std::string ncs_risk_csv(const metrics::MetricsReport& report) {
    std::string out = "model,ncs,risk_index\n";
    for (const auto& [model, score] : report.ncs_scores) {
        out += model + "," + rate(score) + ",";
        auto it = report.risk_scores.find(model);
        out += (it != report.risk_scores.end() ? rate(it->second) : "") + "\n";
    }
    if (report.ncs_risk_pearson)
        out += "pearson_ncs_vs_risk," + rate(*report.ncs_risk_pearson) + ",\n";
    return out;
}

std::string imbalance_markdown(const std::vector<metrics::ImbalanceRow>& rows) {
    std::string out =
        "| Buyer | Seller | Avg Payment($) | Δ from Baseline (%) | Impact |\n|---|---|---|---|---|\n";
    for (const auto& row : rows) {
        std::string delta = "—";
        if (row.delta_pct) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%+.2f%%", *row.delta_pct);
            delta = buf;
        }
        out += "| " + row.buyer_id + " | " + row.seller_id + " | " + money2(row.avg_payment) +
               " | " + delta + " | " + row.impact + " |\n";
    }
    return out;
}

std::vector<std::filesystem::path> emit_reports(
    const metrics::MetricsReport& report, const std::filesystem::path& run_dir,
    const std::vector<metrics::ImbalanceRow>* imbalance) {
    const auto dir = run_dir / "reports";
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto write = [&](const char* name, const std::string& content) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        written.push_back(path);
    };
    write("metrics_cells.csv", cells_csv(report));
    write("metrics_long.csv", long_csv(report));
    write("anomalies.md", anomaly_markdown(report));
    write("seller_summary.md", seller_summary_markdown(report));
    if (!report.ncs_scores.empty()) write("ncs_risk.csv", ncs_risk_csv(report));
    if (imbalance != nullptr) write("imbalance.md", imbalance_markdown(*imbalance));
    return written;
}

}  // namespace dealbench::runner
