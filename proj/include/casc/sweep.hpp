#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "casc/dataset.hpp"
#include "casc/metrics.hpp"
#include "casc/window.hpp"

namespace casc {

// Exact rational, always normalized with a positive denominator. Abstention
// fractions are grouped on this rather than on rounded doubles so equality is
// well-defined.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Fraction of(std::int64_t num, std::int64_t den);

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool operator==(const Fraction&) const = default;
    friend bool operator<(const Fraction& a, const Fraction& b) {
        return a.num * b.den < b.num * a.den;
    }
};

// All windows (lower <= upper) over an evenly stepped threshold list, in
// lexicographic (lower, upper) order.
struct Grid {
    double step = 0.0;
    double min_threshold = 0.0;
    double max_threshold = 0.0;
    std::vector<double> thresholds;
    std::vector<Window> windows;
    std::vector<std::pair<std::size_t, std::size_t>> window_idx;  // threshold indices
};

// The default sweep resolution used by the CLI.
inline constexpr double kDefaultGridStep = 0.05;
inline constexpr double kDefaultGridMin = 0.0;
inline constexpr double kDefaultGridMax = 0.95;

Grid make_grid(double step, double min_threshold, double max_threshold);

// One stage evaluated at one window: the per-image decisions over eval_index
// (dataset record positions) plus the metrics derived from them.
struct Candidate {
    std::string stage;
    Window window;
    std::vector<std::uint32_t> eval_index;
    std::vector<Decision> decisions;
    MetricReport report;

    Fraction abstention() const {
        return Fraction::of(report.n_abstained, report.n_evaluated + report.n_abstained);
    }

    bool operator==(const Candidate&) const = default;
};

// Recomputes the report for a decision list: confusion over accepted images,
// MCC/accuracy/FA over those, abstention over the whole eval set. The single
// source of truth for candidate metrics.
MetricReport report_from_decisions(const Dataset& dataset,
                                   std::span<const std::uint32_t> eval_index,
                                   std::span<const Decision> decisions);

// One candidate per grid window, in grid order. Deterministic for any worker
// count.
std::vector<Candidate> sweep_stage(const Dataset& dataset, const std::string& stage,
                                   const Grid& grid, int workers = 1);

// A single stage+window candidate over the full dataset.
Candidate evaluate_candidate(const Dataset& dataset, const std::string& stage,
                             const Window& window);

// Groups candidates by exact abstention fraction and keeps the highest-MCC
// candidate per group; MCC ties go to the lexicographically smallest window.
std::map<Fraction, Candidate> group_best_by_abstention(std::span<const Candidate> candidates);

// CSV matrix, rows = lower threshold, columns = upper threshold; cells with
// lower > upper are empty. metric is one of mcc, accuracy,
// abstention_fraction, false_alarm_fraction.
std::string export_heatmap(std::span<const Candidate> candidates, std::string_view metric);

// One row per candidate: stage, window bounds, then the MetricReport columns.
std::string candidates_csv(std::span<const Candidate> candidates);

// Diagnostics rows: image_id, l, u, decision (accepted alert or "abstain").
std::string decisions_csv(const Dataset& dataset, const Candidate& candidate);

}  // namespace casc
