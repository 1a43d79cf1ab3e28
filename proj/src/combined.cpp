#include "casc/combined.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "casc/csv.hpp"
#include "casc/detail/alert_table.hpp"
#include "casc/detail/parallel.hpp"
#include "casc/error.hpp"

namespace casc {

namespace {

// Phone-side aggregates that every cloud pairing shares.
struct PhoneBase {
    ConfusionMatrix accepted_conf;                       // phone-accepted images
    std::vector<std::uint32_t> abstained;                // conditioning subset, ascending
    std::array<std::int64_t, kAlertLevels> subset_truth{};  // truth classes of the subset
};

void require_full_coverage(const Dataset& dataset, const Candidate& phone) {
    const std::size_t n = dataset.records.size();
    if (phone.eval_index.size() != n || phone.decisions.size() != n) {
        throw ConfigError("phone candidate does not cover the full dataset");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (phone.eval_index[i] != i) {
            throw ConfigError("phone candidate does not cover the full dataset");
        }
    }
}

PhoneBase make_phone_base(const Dataset& dataset, const Candidate& phone) {
    require_full_coverage(dataset, phone);
    PhoneBase base;
    for (std::size_t i = 0; i < phone.decisions.size(); ++i) {
        const AlertLevel truth = truth_alert(dataset.records[i]);
        if (phone.decisions[i].accepted()) {
            ++base.accepted_conf.at(truth, phone.decisions[i].alert());
        } else {
            base.abstained.push_back(static_cast<std::uint32_t>(i));
            ++base.subset_truth[alert_index(truth)];
        }
    }
    return base;
}

CombinedResult apply_cloud(const Dataset& dataset, const PhoneBase& base, const Candidate& phone,
                           const Candidate& cloud) {
    if (cloud.eval_index.size() != base.abstained.size() ||
        !std::equal(cloud.eval_index.begin(), cloud.eval_index.end(), base.abstained.begin())) {
        throw ConfigError("cloud candidate is not conditioned on this phone candidate");
    }

    ConfusionMatrix conf = base.accepted_conf;
    std::array<std::int64_t, kAlertLevels> cloud_truth{};
    std::int64_t cloud_accepted = 0;
    for (std::size_t k = 0; k < cloud.decisions.size(); ++k) {
        if (!cloud.decisions[k].accepted()) continue;
        const AlertLevel truth = truth_alert(dataset.records[cloud.eval_index[k]]);
        ++conf.at(truth, cloud.decisions[k].alert());
        ++cloud_truth[alert_index(truth)];
        ++cloud_accepted;
    }
    // Whatever the cloud also abstained on is human-judged: prediction equals
    // the ground truth, a diagonal contribution per truth class.
    for (int k = 0; k < kAlertLevels; ++k) {
        conf.cells[k][k] += base.subset_truth[k] - cloud_truth[k];
    }

    CombinedResult result{phone.window,
                          cloud.window,
                          phone.abstention(),
                          std::nullopt,
                          conf,
                          0.0,
                          0,
                          0,
                          0};
    result.n_phone_accepted = phone.report.n_evaluated;
    result.n_cloud_accepted = cloud_accepted;
    result.n_human = static_cast<std::int64_t>(base.abstained.size()) - cloud_accepted;
    if (!base.abstained.empty()) result.cloud_abstention = cloud.abstention();
    result.mcc = mcc(conf);
    return result;
}

std::vector<Candidate> conditioned_from_table(const Dataset& dataset,
                                              const detail::AlertTable& table, const Grid& grid,
                                              const std::string& stage,
                                              std::span<const std::uint32_t> subset, int workers) {
    std::vector<std::uint32_t> subset_copy(subset.begin(), subset.end());
    std::vector<Candidate> out;
    out.reserve(grid.windows.size());
    for (std::size_t w = 0; w < grid.windows.size(); ++w) {
        out.push_back(Candidate{stage, grid.windows[w], subset_copy, {}, {}});
    }
    detail::parallel_for(grid.windows.size(), workers, [&](std::size_t w) {
        const auto [ti, tj] = grid.window_idx[w];
        Candidate& cand = out[w];
        cand.decisions.reserve(subset.size());
        for (std::uint32_t i : subset) {
            const Partition p{table.count(i, ti), table.count(i, tj)};
            const AlertLevel la = table.alert(i, ti);
            const AlertLevel ua = table.alert(i, tj);
            cand.decisions.push_back(la == ua ? Decision::accept(p, la) : Decision::abstain(p));
        }
        cand.report = report_from_decisions(dataset, cand.eval_index, cand.decisions);
    });
    return out;
}

std::size_t bucket_index(double fraction, double bucket) {
    return static_cast<std::size_t>(std::floor(fraction / bucket + 1e-9));
}

bool cell_better(const CascadeCell& a, const CascadeCell& b) {
    if (a.mcc != b.mcc) return a.mcc > b.mcc;
    if (a.phone_window != b.phone_window) return a.phone_window < b.phone_window;
    return a.cloud_window < b.cloud_window;
}

// Median without a full sort; buf is scratch.
double median_of(std::vector<double>& buf) {
    const std::size_t n = buf.size();
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    const double upper = *mid;
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(buf.begin(), mid);
    return 0.5 * (lower + upper);
}

void smooth_curve(ComparisonCurve& curve) {
    auto& pts = curve.points;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.fraction < b.fraction; });
    const double half = curve.smooth_width / 2.0 + 1e-12;
    std::size_t lo = 0, hi = 0;
    std::vector<double> buf;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (pts[lo].fraction < pts[i].fraction - half) ++lo;
        while (hi < pts.size() && pts[hi].fraction <= pts[i].fraction + half) ++hi;
        buf.clear();
        for (std::size_t j = lo; j < hi; ++j) buf.push_back(pts[j].fa_raw);
        pts[i].fa_smoothed = median_of(buf);
    }
    curve.empty_flagged = pts.empty();
}

std::int64_t fa_count_of(const Dataset& dataset, const Candidate& cand) {
    std::int64_t fa = 0;
    for (std::size_t k = 0; k < cand.decisions.size(); ++k) {
        const Decision& d = cand.decisions[k];
        if (d.accepted() && d.alert() == AlertLevel::Spray &&
            truth_alert(dataset.records[cand.eval_index[k]]) != AlertLevel::Spray) {
            ++fa;
        }
    }
    return fa;
}

}  // namespace

double CombinedResult::false_alarm_fraction() const {
    const std::int64_t total = confusion.total();
    if (total == 0) return 0.0;
    const std::int64_t fa = confusion.at(AlertLevel::NoAction, AlertLevel::Spray) +
                            confusion.at(AlertLevel::Cautious, AlertLevel::Spray);
    return static_cast<double>(fa) / static_cast<double>(total);
}

ConditionedCandidates conditioned_cloud_candidates(const Dataset& dataset, const Candidate& phone,
                                                   const Grid& grid, const std::string& stage,
                                                   int workers) {
    if (dataset.records.empty()) throw DataError("conditioned_cloud_candidates: dataset is empty");
    PhoneBase base = make_phone_base(dataset, phone);
    if (base.abstained.empty()) return {true, {}};

    const detail::AlertTable table = detail::build_alert_table(dataset, stage, grid.thresholds);
    return {false, conditioned_from_table(dataset, table, grid, stage, base.abstained, workers)};
}

CombinedResult combined_evaluate(const Dataset& dataset, const Candidate& phone,
                                 const Candidate& cloud) {
    if (dataset.records.empty()) throw DataError("combined_evaluate: dataset is empty");
    const PhoneBase base = make_phone_base(dataset, phone);
    return apply_cloud(dataset, base, phone, cloud);
}

Candidate conditioned_candidate(const Dataset& dataset, const Candidate& phone,
                                const Window& window, const std::string& stage) {
    const PhoneBase base = make_phone_base(dataset, phone);
    Candidate cand{stage, window, base.abstained, {}, {}};
    cand.decisions.reserve(base.abstained.size());
    std::vector<double> confidences;
    for (std::uint32_t i : base.abstained) {
        const auto& rec = dataset.records[i];
        auto it = rec.stages.find(stage);
        if (it == rec.stages.end()) {
            throw DataError("record " + rec.image_id + " lacks stage '" + stage + "'");
        }
        confidences.clear();
        for (const auto& box : it->second) confidences.push_back(box.confidence);
        cand.decisions.push_back(decide(confidences, window));
    }
    cand.report = report_from_decisions(dataset, cand.eval_index, cand.decisions);
    return cand;
}

std::vector<CascadeCell> combined_grid(const Dataset& dataset, const Grid& phone_grid,
                                       const Grid& cloud_grid, double bucket, int workers) {
    if (!(bucket > 0.0 && bucket <= 1.0)) throw ConfigError("bucket must lie in (0,1]");
    if (phone_grid.windows.empty() || cloud_grid.windows.empty()) {
        throw ConfigError("combined_grid: empty grid");
    }

    const auto phone_cands = sweep_stage(dataset, "phone", phone_grid, workers);
    const auto best_phone = group_best_by_abstention(phone_cands);
    std::vector<const Candidate*> selected;
    selected.reserve(best_phone.size());
    for (const auto& [frac, cand] : best_phone) selected.push_back(&cand);

    const detail::AlertTable cloud_table =
        detail::build_alert_table(dataset, "cloud", cloud_grid.thresholds);

    const std::size_t n_buckets = bucket_index(1.0, bucket);
    std::vector<std::vector<CascadeCell>> slots(selected.size());
    detail::parallel_for(selected.size(), workers, [&](std::size_t s) {
        const Candidate& phone = *selected[s];
        const PhoneBase base = make_phone_base(dataset, phone);
        auto& cells = slots[s];
        if (base.abstained.empty()) {
            // No images reach the cloud; the phone-only result holds for any
            // cloud abstention level.
            for (std::size_t iy = 0; iy <= n_buckets; ++iy) {
                cells.push_back(CascadeCell{0.0, static_cast<double>(iy) * bucket,
                                            phone.report.mcc, phone.window, Window(0.0, 0.0),
                                            phone.abstention(), std::nullopt,
                                            phone.report.n_evaluated, 0, 0});
            }
            return;
        }
        const auto conditioned = conditioned_from_table(dataset, cloud_table, cloud_grid, "cloud",
                                                        base.abstained, 1);
        const auto best_cloud = group_best_by_abstention(conditioned);
        for (const auto& [cfrac, cloud_cand] : best_cloud) {
            const CombinedResult res = apply_cloud(dataset, base, phone, cloud_cand);
            cells.push_back(CascadeCell{
                static_cast<double>(bucket_index(res.phone_abstention.value(), bucket)) * bucket,
                static_cast<double>(bucket_index(cfrac.value(), bucket)) * bucket, res.mcc,
                res.phone_window, res.cloud_window, res.phone_abstention, res.cloud_abstention,
                res.n_phone_accepted, res.n_cloud_accepted, res.n_human});
        }
    });

    std::map<std::pair<std::size_t, std::size_t>, CascadeCell> grid_cells;
    for (const auto& cells : slots) {
        for (const auto& cell : cells) {
            const std::pair<std::size_t, std::size_t> key{bucket_index(cell.x, bucket),
                                                          bucket_index(cell.y, bucket)};
            auto it = grid_cells.find(key);
            if (it == grid_cells.end()) {
                grid_cells.emplace(key, cell);
            } else if (cell_better(cell, it->second)) {
                it->second = cell;
            }
        }
    }
    std::vector<CascadeCell> out;
    out.reserve(grid_cells.size());
    for (const auto& [key, cell] : grid_cells) out.push_back(cell);
    return out;
}

std::string_view family_name(CurveFamily family) {
    switch (family) {
        case CurveFamily::PhoneOnly: return "phone_only";
        case CurveFamily::CloudOnly: return "cloud_only";
        case CurveFamily::Combined: return "combined";
    }
    return "?";
}

std::vector<ComparisonCurve> comparison_curves(const Dataset& dataset, const Grid& phone_grid,
                                               const Grid& cloud_grid,
                                               const ComparisonOptions& options) {
    if (!(options.smooth_width > 0.0)) throw ConfigError("smooth_width must be positive");

    const auto phone_cands = sweep_stage(dataset, "phone", phone_grid, options.workers);
    const auto cloud_cands = sweep_stage(dataset, "cloud", cloud_grid, options.workers);
    const auto n = static_cast<std::int64_t>(dataset.records.size());

    ComparisonCurve phone_curve{CurveFamily::PhoneOnly, options.smooth_width, false, {}};
    ComparisonCurve cloud_curve{CurveFamily::CloudOnly, options.smooth_width, false, {}};
    ComparisonCurve combined_curve{CurveFamily::Combined, options.smooth_width, false, {}};

    // One phone representative per abstention fraction, as in the combined
    // model set.
    const auto best_phone = group_best_by_abstention(phone_cands);
    std::vector<const Candidate*> selected;
    selected.reserve(best_phone.size());
    for (const auto& [frac, cand] : best_phone) selected.push_back(&cand);

    // Inclusion set -> unconditioned cloud candidates sharing it exactly.
    std::map<std::vector<std::uint32_t>, std::vector<std::size_t>> cloud_by_inclusion;
    for (std::size_t c = 0; c < cloud_cands.size(); ++c) {
        std::vector<std::uint32_t> included;
        for (std::size_t k = 0; k < cloud_cands[c].decisions.size(); ++k) {
            if (cloud_cands[c].decisions[k].accepted()) {
                included.push_back(cloud_cands[c].eval_index[k]);
            }
        }
        cloud_by_inclusion[std::move(included)].push_back(c);
    }

    for (const Candidate* phone : selected) {
        const double fraction = phone->abstention().value();
        if (phone->report.n_evaluated > 0) {
            phone_curve.points.push_back({fraction, phone->report.false_alarm_fraction, 0.0});
        }

        std::vector<std::uint32_t> included;
        for (std::size_t k = 0; k < phone->decisions.size(); ++k) {
            if (phone->decisions[k].accepted()) included.push_back(phone->eval_index[k]);
        }
        auto match = cloud_by_inclusion.find(included);
        if (match != cloud_by_inclusion.end() && !included.empty()) {
            const Candidate* best = nullptr;
            for (std::size_t c : match->second) {
                const Candidate& cand = cloud_cands[c];
                const bool better =
                    best == nullptr ||
                    cand.report.false_alarm_fraction < best->report.false_alarm_fraction ||
                    (cand.report.false_alarm_fraction == best->report.false_alarm_fraction &&
                     cand.window < best->window);
                if (better) best = &cand;
            }
            cloud_curve.points.push_back({fraction, best->report.false_alarm_fraction, 0.0});
        }
    }

    // Combined family: the selected pipelines, one conditioned group-best
    // cloud per conditioned abstention fraction, abstentions filled by cloud
    // then human before FA.
    const detail::AlertTable cloud_table =
        detail::build_alert_table(dataset, "cloud", cloud_grid.thresholds);
    std::vector<std::vector<CurvePoint>> slots(selected.size());
    detail::parallel_for(selected.size(), options.workers, [&](std::size_t p) {
        const Candidate& phone = *selected[p];
        const double fraction = phone.abstention().value();
        const std::int64_t phone_fa = fa_count_of(dataset, phone);
        const PhoneBase base = make_phone_base(dataset, phone);
        if (options.combined_on_phone_included_only) {
            if (phone.report.n_evaluated > 0) {
                slots[p].push_back({fraction, phone.report.false_alarm_fraction, 0.0});
            }
            return;
        }
        if (base.abstained.empty()) {
            slots[p].push_back(
                {fraction, static_cast<double>(phone_fa) / static_cast<double>(n), 0.0});
            return;
        }
        const auto conditioned = conditioned_from_table(dataset, cloud_table, cloud_grid, "cloud",
                                                        base.abstained, 1);
        for (const auto& [cfrac, cloud_cand] : group_best_by_abstention(conditioned)) {
            const std::int64_t fa = phone_fa + fa_count_of(dataset, cloud_cand);
            slots[p].push_back({fraction, static_cast<double>(fa) / static_cast<double>(n), 0.0});
        }
    });
    for (auto& slot : slots) {
        combined_curve.points.insert(combined_curve.points.end(), slot.begin(), slot.end());
    }

    smooth_curve(phone_curve);
    smooth_curve(cloud_curve);
    smooth_curve(combined_curve);
    return {phone_curve, cloud_curve, combined_curve};
}

std::string export_grid(std::span<const CascadeCell> cells, double bucket) {
    if (!(bucket > 0.0 && bucket <= 1.0)) throw ConfigError("bucket must lie in (0,1]");
    const std::size_t n_buckets = bucket_index(1.0, bucket);

    if (cells.empty()) {
        std::string csv = "phone\\cloud";
        for (std::size_t iy = 0; iy <= n_buckets; ++iy) {
            csv += ',' + fmt_threshold(static_cast<double>(iy) * bucket);
        }
        csv += '\n';
        return csv;
    }

    std::map<std::pair<std::size_t, std::size_t>, double> values;
    for (const auto& cell : cells) {
        const std::pair<std::size_t, std::size_t> key{bucket_index(cell.x, bucket),
                                                      bucket_index(cell.y, bucket)};
        auto it = values.find(key);
        if (it == values.end() || cell.mcc > it->second) values[key] = cell.mcc;
    }

    std::string csv = "phone\\cloud";
    for (std::size_t iy = 0; iy <= n_buckets; ++iy) {
        csv += ',' + fmt_threshold(static_cast<double>(iy) * bucket);
    }
    csv += '\n';
    for (std::size_t ix = 0; ix <= n_buckets; ++ix) {
        csv += fmt_threshold(static_cast<double>(ix) * bucket);
        for (std::size_t iy = 0; iy <= n_buckets; ++iy) {
            csv += ',';
            auto it = values.find({ix, iy});
            if (it != values.end()) csv += fmt_g(it->second);
        }
        csv += '\n';
    }
    return csv;
}

namespace {

std::string fraction_str(const Fraction& f) {
    return std::to_string(f.num) + "/" + std::to_string(f.den);
}

}  // namespace

std::string export_grid_cells(std::span<const CascadeCell> cells) {
    // One row per bucket pair; collisions keep the highest mcc.
    std::map<std::pair<double, double>, const CascadeCell*> deduped;
    for (const auto& cell : cells) {
        auto it = deduped.find({cell.x, cell.y});
        if (it == deduped.end() || cell_better(cell, *it->second)) {
            deduped[{cell.x, cell.y}] = &cell;
        }
    }
    std::string csv =
        "phone_bucket,cloud_bucket,mcc,phone_lower,phone_upper,cloud_lower,cloud_upper,"
        "phone_abstention,cloud_abstention,n_phone_accepted,n_cloud_accepted,n_human\n";
    for (const auto& [key, cell_ptr] : deduped) {
        const CascadeCell& cell = *cell_ptr;
        csv += fmt_threshold(cell.x);
        csv += ',' + fmt_threshold(cell.y);
        csv += ',' + fmt_g(cell.mcc);
        csv += ',' + fmt_threshold(cell.phone_window.lower());
        csv += ',' + fmt_threshold(cell.phone_window.upper());
        csv += ',' + fmt_threshold(cell.cloud_window.lower());
        csv += ',' + fmt_threshold(cell.cloud_window.upper());
        csv += ',' + fraction_str(cell.phone_abstention);
        csv += ',';
        if (cell.cloud_abstention) csv += fraction_str(*cell.cloud_abstention);
        csv += ',' + std::to_string(cell.n_phone_accepted);
        csv += ',' + std::to_string(cell.n_cloud_accepted);
        csv += ',' + std::to_string(cell.n_human);
        csv += '\n';
    }
    return csv;
}

std::string export_curves(std::span<const ComparisonCurve> curves) {
    std::string csv = "family,abstention_fraction,fa_raw,fa_smoothed\n";
    for (const auto& curve : curves) {
        for (const auto& pt : curve.points) {
            csv += std::string(family_name(curve.family));
            csv += ',' + fmt_g(pt.fraction);
            csv += ',' + fmt_g(pt.fa_raw);
            csv += ',' + fmt_g(pt.fa_smoothed);
            csv += '\n';
        }
    }
    return csv;
}

}  // namespace casc
