#include "dealbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

namespace dealbench::metrics {

std::string DealRecord::case_key() const {
    return product_name + "|" + catalog::to_string(budget_level) + "|" + std::to_string(trial);
}

DealRecord deal_from_transcript(const engine::Transcript& t) {
    DealRecord d;
    d.product_name = t.product_name;
    d.category = t.category;
    d.retail_price = t.retail_price;
    d.wholesale_price = t.wholesale_price;
    d.beta = t.beta;
    d.budget_level = t.budget_level;
    d.trial = t.trial;
    d.buyer_id = t.buyer_id;
    d.seller_id = t.seller_id;
    d.aborted = t.status != "completed";
    if (t.outcome) {
        d.accepted = t.outcome->decision == engine::Outcome::FinalDecision::accept;
        d.deadlock = t.outcome->deadlock;
        d.final_price = t.outcome->final_price;
        d.flags = t.outcome->flags;
    }
    return d;
}

double prr(Money retail_price, Money final_price) {
    return (retail_price.dollars() - final_price.dollars()) / retail_price.dollars();
}

SellerAggregate aggregate_seller(const std::vector<DealRecord>& deals,
                                 std::optional<Money> tp_min) {
    SellerAggregate agg;
    double margin_sum = 0.0;
    for (const auto& d : deals) {
        if (d.aborted) continue;
        ++agg.n;
        if (!d.accepted || !d.final_price) continue;
        ++agg.n_deal;
        agg.total_profit = agg.total_profit + (*d.final_price - d.wholesale_price);
        margin_sum += (d.final_price->dollars() - d.wholesale_price.dollars()) /
                      d.wholesale_price.dollars();
    }
    agg.deal_rate = agg.n == 0 ? 0.0 : static_cast<double>(agg.n_deal) / static_cast<double>(agg.n);
    if (agg.n_deal > 0) agg.profit_rate = margin_sum / static_cast<double>(agg.n_deal);
    if (tp_min) {
        if (tp_min->cents() > 0)
            agg.relative_profit = agg.total_profit.dollars() / tp_min->dollars();
        else
            std::cerr << "warning: relative profit undefined (non-positive reference profit "
                      << tp_min->str() << ")\n";
    }
    return agg;
}

AnomalyRates anomaly_rates(const std::vector<DealRecord>& deals) {
    AnomalyRates rates;
    for (const auto& d : deals) {
        if (d.aborted) continue;
        ++rates.n;
        if (d.deadlock) ++rates.n_deadlock;
        if (!d.accepted || !d.final_price) continue;
        ++rates.n_deal;
        if (d.flags.over_budget) ++rates.n_over_budget;
        if (d.flags.below_wholesale) ++rates.n_below_wholesale;
        if (d.flags.over_retail) {
            ++rates.n_over_retail;
            if (d.beta >= d.retail_price) ++rates.n_over_retail_budget_ok;
        }
    }
    const auto n = static_cast<double>(rates.n);
    if (rates.n > 0) {
        rates.obr = static_cast<double>(rates.n_over_budget) / n;
        rates.owr = static_cast<double>(rates.n_below_wholesale) / n;
        rates.dlr = static_cast<double>(rates.n_deadlock) / n;
    }
    if (rates.n_deal > 0) {
        rates.opr = static_cast<double>(rates.n_over_retail) / static_cast<double>(rates.n_deal);
        rates.opr_budget_ok =
            static_cast<double>(rates.n_over_retail_budget_ok) / static_cast<double>(rates.n_deal);
    }
    return rates;
}

std::vector<double> zscores(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    if (values.empty()) return {};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= n;  // population variance
    std::vector<double> out(values.size(), 0.0);
    if (var <= 0.0) return out;  // zero-variance component contributes nothing
    const double sd = std::sqrt(var);
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
    return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw MetricsError("pearson requires two equal-length series of >= 2 points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw MetricsError("pearson undefined for constant series");
    return sxy / std::sqrt(sxx * syy);
}

namespace {

std::map<std::string, double> mean_zscores(const std::vector<std::string>& models,
                                           const std::vector<std::vector<double>>& components) {
    std::vector<std::vector<double>> z;
    z.reserve(components.size());
    for (const auto& comp : components) z.push_back(zscores(comp));
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < models.size(); ++i) {
        double sum = 0.0;
        for (const auto& comp : z) sum += comp[i];
        out[models[i]] = sum / static_cast<double>(z.size());
    }
    return out;
}

}  // namespace

std::map<std::string, double> ncs(const std::map<std::string, NcsInput>& per_model) {
    if (per_model.size() < 2)
        throw InsufficientPopulation("NCS needs at least two models, got " +
                                     std::to_string(per_model.size()));
    std::vector<std::string> models;
    std::vector<double> buyer, seller_reversed, rp;
    for (const auto& [model, input] : per_model) {
        models.push_back(model);
        buyer.push_back(input.prr_buyer);
        seller_reversed.push_back(1.0 - input.prr_seller);
        rp.push_back(input.rp);
    }
    return mean_zscores(models, {buyer, seller_reversed, rp});
}

std::map<std::string, double> risk_index(const std::map<std::string, RiskInput>& per_model) {
    if (per_model.size() < 2)
        throw InsufficientPopulation("risk index needs at least two models, got " +
                                     std::to_string(per_model.size()));
    std::vector<std::string> models;
    std::vector<double> obr, owr, opr, dlr;
    for (const auto& [model, input] : per_model) {
        models.push_back(model);
        obr.push_back(input.obr);
        owr.push_back(input.owr);
        opr.push_back(input.opr);
        dlr.push_back(input.dlr);
    }
    return mean_zscores(models, {obr, owr, opr, dlr});
}

std::vector<ImbalanceRow> imbalance_report(
    const std::vector<DealRecord>& deals,
    const std::pair<std::string, std::string>& baseline_pair,
    std::vector<std::pair<std::string, std::string>> pairings) {
    if (pairings.empty()) {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& d : deals)
            if (!d.aborted) seen.insert({d.buyer_id, d.seller_id});
        pairings.assign(seen.begin(), seen.end());
    }
    if (std::find(pairings.begin(), pairings.end(), baseline_pair) == pairings.end())
        throw MetricsError("baseline pairing " + baseline_pair.first + " vs " +
                           baseline_pair.second + " not present");

    // Cases (product, budget, trial) closed successfully under every pairing.
    std::map<std::pair<std::string, std::string>, std::map<std::string, double>> payments;
    for (const auto& d : deals) {
        if (d.aborted || !d.accepted || !d.final_price) continue;
        payments[{d.buyer_id, d.seller_id}][d.case_key()] = d.final_price->dollars();
    }
    std::set<std::string> shared;
    bool first = true;
    for (const auto& pairing : pairings) {
        std::set<std::string> keys;
        for (const auto& [key, _] : payments[pairing]) keys.insert(key);
        if (first) {
            shared = std::move(keys);
            first = false;
        } else {
            std::set<std::string> both;
            std::set_intersection(shared.begin(), shared.end(), keys.begin(), keys.end(),
                                  std::inserter(both, both.begin()));
            shared = std::move(both);
        }
    }
    if (shared.empty())
        throw EmptyIntersection("no negotiation case succeeded under every compared pairing");

    auto avg_payment = [&](const std::pair<std::string, std::string>& pairing) {
        double sum = 0.0;
        for (const auto& key : shared) sum += payments[pairing].at(key);
        return sum / static_cast<double>(shared.size());
    };
    const double baseline_avg = avg_payment(baseline_pair);

    std::vector<ImbalanceRow> rows;
    // Baseline row first, then the rest in deterministic order.
    std::stable_sort(pairings.begin(), pairings.end(),
                     [&](const auto& a, const auto& b) {
                         if ((a == baseline_pair) != (b == baseline_pair))
                             return a == baseline_pair;
                         return a < b;
                     });
    for (const auto& pairing : pairings) {
        ImbalanceRow row;
        row.buyer_id = pairing.first;
        row.seller_id = pairing.second;
        row.avg_payment = avg_payment(pairing);
        row.shared_cases = shared.size();
        if (pairing == baseline_pair) {
            row.impact = "Baseline";
        } else {
            const double delta = (row.avg_payment - baseline_avg) / baseline_avg * 100.0;
            row.delta_pct = delta;
            char buf[64];
            if (delta > 0) {
                std::snprintf(buf, sizeof buf, "Buyer overpays by %.2f%%", delta);
            } else if (delta < 0) {
                std::snprintf(buf, sizeof buf, "Seller earns %.2f%% less", -delta);
            } else {
                std::snprintf(buf, sizeof buf, "No change");
            }
            row.impact = buf;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

MetricsReport build_report(const std::vector<DealRecord>& deals, const ReportOptions& options) {
    MetricsReport report;
    std::map<CellKey, std::vector<DealRecord>> by_cell;
    for (const auto& d : deals) {
        ++report.n_total;
        if (d.aborted) {
            ++report.n_aborted;
            continue;
        }
        by_cell[{d.buyer_id, d.seller_id, d.budget_level}].push_back(d);
    }
    if (by_cell.empty()) throw NoData("no non-aborted negotiations to aggregate");

    // Reference TP per (buyer, budget) slice: minimum positive TP across sellers.
    std::map<std::pair<std::string, catalog::BudgetLevel>, Money> slice_min_tp;
    for (const auto& [key, cell_deals] : by_cell) {
        const auto agg = aggregate_seller(cell_deals, std::nullopt);
        if (agg.total_profit.cents() <= 0) continue;
        const auto slice = std::make_pair(key.buyer_id, key.budget_level);
        auto it = slice_min_tp.find(slice);
        if (it == slice_min_tp.end() || agg.total_profit < it->second)
            slice_min_tp[slice] = agg.total_profit;
    }

    for (const auto& [key, cell_deals] : by_cell) {
        CellMetrics cell;
        std::optional<Money> reference;
        const auto slice = std::make_pair(key.buyer_id, key.budget_level);
        if (auto it = slice_min_tp.find(slice); it != slice_min_tp.end()) reference = it->second;
        cell.seller = aggregate_seller(cell_deals, reference);
        cell.anomalies = anomaly_rates(cell_deals);
        double prr_sum = 0.0;
        std::size_t prr_n = 0;
        for (const auto& d : cell_deals)
            if (d.accepted && d.final_price) {
                prr_sum += prr(d.retail_price, *d.final_price);
                ++prr_n;
            }
        if (prr_n > 0) cell.prr_mean = prr_sum / static_cast<double>(prr_n);
        report.cells[key] = std::move(cell);
    }

    // Model-level summaries.
    std::set<std::string> model_names;
    for (const auto& d : deals)
        if (!d.aborted) {
            model_names.insert(d.buyer_id);
            model_names.insert(d.seller_id);
        }

    // Total profit as seller, per RP mode.
    std::map<std::string, std::vector<DealRecord>> as_seller, as_buyer;
    for (const auto& d : deals) {
        if (d.aborted) continue;
        as_seller[d.seller_id].push_back(d);
        as_buyer[d.buyer_id].push_back(d);
    }

    auto tp_of = [&](const std::string& model, std::optional<catalog::Category> category) {
        Money tp;
        auto it = as_seller.find(model);
        if (it == as_seller.end()) return tp;
        for (const auto& d : it->second) {
            if (category && d.category != *category) continue;
            if (d.accepted && d.final_price) tp = tp + (*d.final_price - d.wholesale_price);
        }
        return tp;
    };

    auto global_reference = [&]() -> std::optional<Money> {
        if (options.reference_seller) return tp_of(*options.reference_seller, std::nullopt);
        std::optional<Money> min_tp;
        for (const auto& m : model_names) {
            const Money tp = tp_of(m, std::nullopt);
            if (tp.cents() <= 0) continue;
            if (!min_tp || tp < *min_tp) min_tp = tp;
        }
        return min_tp;
    };

    auto category_rp = [&](const std::string& model) -> std::optional<double> {
        std::set<catalog::Category> categories;
        for (const auto& d : deals)
            if (!d.aborted) categories.insert(d.category);
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto c : categories) {
            std::optional<Money> ref;
            if (options.reference_seller) {
                const Money tp = tp_of(*options.reference_seller, c);
                if (tp.cents() > 0) ref = tp;
            } else {
                for (const auto& m : model_names) {
                    const Money tp = tp_of(m, c);
                    if (tp.cents() <= 0) continue;
                    if (!ref || tp < *ref) ref = tp;
                }
            }
            if (!ref) continue;
            sum += tp_of(model, c).dollars() / ref->dollars();
            ++count;
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };

    const auto reference = global_reference();
    for (const auto& model : model_names) {
        ModelSummary summary;
        const auto seller_deals = as_seller.find(model);
        if (seller_deals != as_seller.end()) {
            auto agg = aggregate_seller(seller_deals->second, std::nullopt);
            summary.total_profit = agg.total_profit;
            summary.deal_rate = agg.deal_rate;
            summary.profit_rate = agg.profit_rate;
            if (options.rp_mode == RpMode::global) {
                if (reference && reference->cents() > 0)
                    summary.relative_profit = agg.total_profit.dollars() / reference->dollars();
            } else {
                summary.relative_profit = category_rp(model);
            }
            const auto seller_anoms = anomaly_rates(seller_deals->second);
            summary.owr = seller_anoms.owr;
            double prr_sum = 0.0;
            std::size_t prr_n = 0;
            for (const auto& d : seller_deals->second)
                if (d.accepted && d.final_price) {
                    prr_sum += prr(d.retail_price, *d.final_price);
                    ++prr_n;
                }
            if (prr_n > 0) summary.prr_seller = prr_sum / static_cast<double>(prr_n);
        }
        const auto buyer_deals = as_buyer.find(model);
        if (buyer_deals != as_buyer.end()) {
            const auto buyer_anoms = anomaly_rates(buyer_deals->second);
            summary.obr = buyer_anoms.obr;
            summary.opr = buyer_anoms.opr;
            summary.dlr = buyer_anoms.dlr;
            double prr_sum = 0.0;
            std::size_t prr_n = 0;
            for (const auto& d : buyer_deals->second)
                if (d.accepted && d.final_price) {
                    prr_sum += prr(d.retail_price, *d.final_price);
                    ++prr_n;
                }
            if (prr_n > 0) summary.prr_buyer = prr_sum / static_cast<double>(prr_n);
        }
        report.models[model] = std::move(summary);
    }

    // Composite scores over models that played both roles with closed deals.
    std::map<std::string, NcsInput> ncs_inputs;
    std::map<std::string, RiskInput> risk_inputs;
    for (const auto& [model, summary] : report.models) {
        if (!summary.prr_buyer || !summary.prr_seller || !summary.relative_profit) continue;
        ncs_inputs[model] = {*summary.prr_buyer, *summary.prr_seller, *summary.relative_profit};
        risk_inputs[model] = {summary.obr, summary.owr, summary.opr.value_or(0.0), summary.dlr};
    }
    if (ncs_inputs.size() >= 2) {
        report.ncs_scores = ncs(ncs_inputs);
        report.risk_scores = risk_index(risk_inputs);
        std::vector<double> a, b;
        for (const auto& [model, score] : report.ncs_scores) {
            a.push_back(score);
            b.push_back(report.risk_scores.at(model));
        }
        try {
            report.ncs_risk_pearson = pearson(a, b);
        } catch (const MetricsError&) {
            // constant series; correlation stays unset
        }
    }
    return report;
}

}  // namespace dealbench::metrics
