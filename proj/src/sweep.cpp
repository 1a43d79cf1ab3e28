#include "casc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "casc/csv.hpp"
#include "casc/detail/alert_table.hpp"
#include "casc/detail/parallel.hpp"
#include "casc/error.hpp"

namespace casc {

Fraction Fraction::of(std::int64_t num, std::int64_t den) {
    if (den <= 0) throw ConfigError("fraction denominator must be positive");
    if (num < 0) throw ConfigError("fraction numerator must be non-negative");
    const std::int64_t g = std::gcd(num, den);
    return Fraction{num / g, den / g};
}

Grid make_grid(double step, double min_threshold, double max_threshold) {
    if (!(step > 0.0)) throw ConfigError("grid step must be positive");
    if (!(min_threshold >= 0.0) || !(min_threshold <= max_threshold) || !(max_threshold < 1.0)) {
        throw ConfigError("grid bounds must satisfy 0 <= min <= max < 1");
    }
    Grid grid;
    grid.step = step;
    grid.min_threshold = min_threshold;
    grid.max_threshold = max_threshold;

    // Tolerant count so thresholds like 19 * 0.05 land inside the bound.
    const auto n = static_cast<std::size_t>(
                       std::floor((max_threshold - min_threshold) / step + 1e-9)) + 1;
    grid.thresholds.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid.thresholds.push_back(min_threshold + static_cast<double>(i) * step);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            grid.windows.emplace_back(grid.thresholds[i], grid.thresholds[j]);
            grid.window_idx.emplace_back(i, j);
        }
    }
    return grid;
}

MetricReport report_from_decisions(const Dataset& dataset,
                                   std::span<const std::uint32_t> eval_index,
                                   std::span<const Decision> decisions) {
    if (eval_index.size() != decisions.size()) {
        throw ConfigError("report_from_decisions: index/decision size mismatch");
    }
    ConfusionMatrix conf;
    std::int64_t abstained = 0;
    for (std::size_t k = 0; k < decisions.size(); ++k) {
        if (!decisions[k].accepted()) {
            ++abstained;
            continue;
        }
        const auto& rec = dataset.records.at(eval_index[k]);
        ++conf.at(truth_alert(rec), decisions[k].alert());
    }
    MetricReport report;
    report.n_abstained = abstained;
    report.n_evaluated = static_cast<std::int64_t>(decisions.size()) - abstained;
    if (!decisions.empty()) {
        report.abstention_fraction =
            static_cast<double>(abstained) / static_cast<double>(decisions.size());
    }
    if (report.n_evaluated > 0) {
        report.mcc = mcc(conf);
        report.accuracy = accuracy(conf);
        const std::int64_t fa = conf.at(AlertLevel::NoAction, AlertLevel::Spray) +
                                conf.at(AlertLevel::Cautious, AlertLevel::Spray);
        report.false_alarm_fraction =
            static_cast<double>(fa) / static_cast<double>(report.n_evaluated);
    }
    return report;
}

std::vector<Candidate> sweep_stage(const Dataset& dataset, const std::string& stage,
                                   const Grid& grid, int workers) {
    if (dataset.records.empty()) throw DataError("sweep_stage: dataset is empty");
    if (grid.windows.empty()) throw ConfigError("sweep_stage: empty grid");

    const detail::AlertTable table = detail::build_alert_table(dataset, stage, grid.thresholds);
    const std::size_t n_images = dataset.records.size();

    std::vector<std::uint32_t> all_index(n_images);
    for (std::size_t i = 0; i < n_images; ++i) all_index[i] = static_cast<std::uint32_t>(i);

    std::vector<Candidate> out;
    out.reserve(grid.windows.size());
    for (std::size_t w = 0; w < grid.windows.size(); ++w) {
        out.push_back(Candidate{stage, grid.windows[w], all_index, {}, {}});
    }

    detail::parallel_for(grid.windows.size(), workers, [&](std::size_t w) {
        const auto [ti, tj] = grid.window_idx[w];
        Candidate& cand = out[w];
        cand.decisions.reserve(n_images);
        for (std::size_t i = 0; i < n_images; ++i) {
            const Partition p{table.count(i, ti), table.count(i, tj)};
            const AlertLevel la = table.alert(i, ti);
            const AlertLevel ua = table.alert(i, tj);
            cand.decisions.push_back(la == ua ? Decision::accept(p, la) : Decision::abstain(p));
        }
        cand.report = report_from_decisions(dataset, cand.eval_index, cand.decisions);
    });
    return out;
}

Candidate evaluate_candidate(const Dataset& dataset, const std::string& stage,
                             const Window& window) {
    if (dataset.records.empty()) throw DataError("evaluate_candidate: dataset is empty");
    Candidate cand{stage, window, {}, {}, {}};
    cand.eval_index.reserve(dataset.records.size());
    cand.decisions.reserve(dataset.records.size());
    std::vector<double> confidences;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& rec = dataset.records[i];
        auto it = rec.stages.find(stage);
        if (it == rec.stages.end()) {
            throw DataError("record " + rec.image_id + " lacks stage '" + stage + "'");
        }
        confidences.clear();
        for (const auto& box : it->second) confidences.push_back(box.confidence);
        cand.eval_index.push_back(static_cast<std::uint32_t>(i));
        cand.decisions.push_back(decide(confidences, window));
    }
    cand.report = report_from_decisions(dataset, cand.eval_index, cand.decisions);
    return cand;
}

std::map<Fraction, Candidate> group_best_by_abstention(std::span<const Candidate> candidates) {
    if (candidates.empty()) throw ConfigError("group_best_by_abstention: no candidates");
    std::map<Fraction, Candidate> best;
    for (const auto& cand : candidates) {
        const Fraction key = cand.abstention();
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, cand);
            continue;
        }
        const bool better = cand.report.mcc > it->second.report.mcc ||
                            (cand.report.mcc == it->second.report.mcc &&
                             cand.window < it->second.window);
        if (better) it->second = cand;
    }
    return best;
}

namespace {

double metric_of(const MetricReport& r, std::string_view metric) {
    if (metric == "mcc") return r.mcc;
    if (metric == "accuracy") return r.accuracy;
    if (metric == "abstention_fraction") return r.abstention_fraction;
    if (metric == "false_alarm_fraction") return r.false_alarm_fraction;
    throw ConfigError("unknown metric name: " + std::string(metric));
}

}  // namespace

std::string export_heatmap(std::span<const Candidate> candidates, std::string_view metric) {
    metric_of(MetricReport{}, metric);  // reject unknown names up front

    std::vector<double> lowers, uppers;
    for (const auto& c : candidates) {
        lowers.push_back(c.window.lower());
        uppers.push_back(c.window.upper());
    }
    auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(lowers);
    uniq(uppers);

    std::map<std::pair<double, double>, double> values;
    for (const auto& c : candidates) {
        values[{c.window.lower(), c.window.upper()}] = metric_of(c.report, metric);
    }

    std::string csv = "lower\\upper";
    for (double u : uppers) csv += "," + fmt_threshold(u);
    csv += '\n';
    for (double lo : lowers) {
        csv += fmt_threshold(lo);
        for (double up : uppers) {
            csv += ',';
            auto it = values.find({lo, up});
            if (it != values.end()) csv += fmt_g(it->second);
        }
        csv += '\n';
    }
    return csv;
}

std::string candidates_csv(std::span<const Candidate> candidates) {
    std::string csv =
        "stage,window_lower,window_upper,mcc,accuracy,abstention_fraction,"
        "false_alarm_fraction,n_evaluated,n_abstained\n";
    for (const auto& c : candidates) {
        csv += csv_escape(c.stage);
        csv += ',' + fmt_threshold(c.window.lower());
        csv += ',' + fmt_threshold(c.window.upper());
        csv += ',' + fmt_g(c.report.mcc);
        csv += ',' + fmt_g(c.report.accuracy);
        csv += ',' + fmt_g(c.report.abstention_fraction);
        csv += ',' + fmt_g(c.report.false_alarm_fraction);
        csv += ',' + std::to_string(c.report.n_evaluated);
        csv += ',' + std::to_string(c.report.n_abstained);
        csv += '\n';
    }
    return csv;
}

std::string decisions_csv(const Dataset& dataset, const Candidate& candidate) {
    std::string csv = "image_id,l,u,decision\n";
    for (std::size_t k = 0; k < candidate.decisions.size(); ++k) {
        const auto& rec = dataset.records.at(candidate.eval_index[k]);
        const Decision& d = candidate.decisions[k];
        csv += csv_escape(rec.image_id);
        csv += ',' + std::to_string(d.partition().l);
        csv += ',' + std::to_string(d.partition().u);
        csv += ',';
        csv += d.accepted() ? alert_name(d.alert()) : "abstain";
        csv += '\n';
    }
    return csv;
}

}  // namespace casc
