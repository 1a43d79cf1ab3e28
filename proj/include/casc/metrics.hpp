#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

#include "casc/alert.hpp"
#include "casc/window.hpp"

namespace casc {

// 3x3 count matrix over alert levels; rows are truth, columns are prediction.
struct ConfusionMatrix {
    std::array<std::array<std::int64_t, kAlertLevels>, kAlertLevels> cells{};

    std::int64_t& at(AlertLevel truth, AlertLevel pred) {
        return cells[alert_index(truth)][alert_index(pred)];
    }
    std::int64_t at(AlertLevel truth, AlertLevel pred) const {
        return cells[alert_index(truth)][alert_index(pred)];
    }

    std::int64_t total() const;
    std::int64_t trace() const;
    std::array<std::int64_t, kAlertLevels> row_sums() const;
    std::array<std::int64_t, kAlertLevels> col_sums() const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    bool operator==(const ConfusionMatrix&) const = default;
};

using AlertPair = std::pair<AlertLevel, AlertLevel>;  // (truth, prediction)

ConfusionMatrix confusion(std::span<const AlertPair> pairs);

// Generalized multiclass MCC:
//   (c*s - sum_k t_k*p_k) / sqrt((s^2 - sum_k p_k^2) * (s^2 - sum_k t_k^2))
// with c the trace, s the total, t the row sums and p the column sums.
// A zero denominator (degenerate marginal) yields 0. Throws on an empty
// matrix.
double mcc(const ConfusionMatrix& m);

// trace / total. Throws on an empty matrix.
double accuracy(const ConfusionMatrix& m);

// |Abstain| / |decisions|. Throws on an empty list.
double abstention_fraction(std::span<const Decision> decisions);

// Fraction of pairs where prediction is Spray but the truth is not.
// The denominator is the full pair list. Throws on an empty list.
double false_alarm_fraction(std::span<const AlertPair> pairs);

// Per-candidate evaluation summary. n_evaluated + n_abstained equals the size
// of the evaluation set; mcc/accuracy/false_alarm_fraction cover the
// evaluated (accepted) pairs only and are 0 when n_evaluated == 0, which the
// CSV exposes via the n_evaluated column.
struct MetricReport {
    double mcc = 0.0;
    double accuracy = 0.0;
    double abstention_fraction = 0.0;
    double false_alarm_fraction = 0.0;
    std::int64_t n_evaluated = 0;
    std::int64_t n_abstained = 0;

    bool operator==(const MetricReport&) const = default;
};

}  // namespace casc
