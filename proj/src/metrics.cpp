#include "casc/metrics.hpp"

#include <cmath>

#include "casc/error.hpp"

namespace casc {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (const auto& row : cells)
        for (std::int64_t v : row) s += v;
    return s;
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t c = 0;
    for (int k = 0; k < kAlertLevels; ++k) c += cells[k][k];
    return c;
}

std::array<std::int64_t, kAlertLevels> ConfusionMatrix::row_sums() const {
    std::array<std::int64_t, kAlertLevels> t{};
    for (int r = 0; r < kAlertLevels; ++r)
        for (int c = 0; c < kAlertLevels; ++c) t[r] += cells[r][c];
    return t;
}

std::array<std::int64_t, kAlertLevels> ConfusionMatrix::col_sums() const {
    std::array<std::int64_t, kAlertLevels> p{};
    for (int r = 0; r < kAlertLevels; ++r)
        for (int c = 0; c < kAlertLevels; ++c) p[c] += cells[r][c];
    return p;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    for (int r = 0; r < kAlertLevels; ++r)
        for (int c = 0; c < kAlertLevels; ++c) cells[r][c] += other.cells[r][c];
    return *this;
}

ConfusionMatrix confusion(std::span<const AlertPair> pairs) {
    ConfusionMatrix m;
    for (const auto& [truth, pred] : pairs) ++m.at(truth, pred);
    return m;
}

double mcc(const ConfusionMatrix& m) {
    const std::int64_t s = m.total();
    if (s == 0) throw ConfigError("mcc: empty confusion matrix");
    const std::int64_t c = m.trace();
    const auto t = m.row_sums();
    const auto p = m.col_sums();

    std::int64_t tp_sum = 0, t2_sum = 0, p2_sum = 0;
    for (int k = 0; k < kAlertLevels; ++k) {
        tp_sum += t[k] * p[k];
        t2_sum += t[k] * t[k];
        p2_sum += p[k] * p[k];
    }
    const double numerator = static_cast<double>(c) * static_cast<double>(s) -
                             static_cast<double>(tp_sum);
    const double dp = static_cast<double>(s) * static_cast<double>(s) - static_cast<double>(p2_sum);
    const double dt = static_cast<double>(s) * static_cast<double>(s) - static_cast<double>(t2_sum);
    if (dp <= 0.0 || dt <= 0.0) return 0.0;
    return numerator / std::sqrt(dp * dt);
}

double accuracy(const ConfusionMatrix& m) {
    const std::int64_t s = m.total();
    if (s == 0) throw ConfigError("accuracy: empty confusion matrix");
    return static_cast<double>(m.trace()) / static_cast<double>(s);
}

double abstention_fraction(std::span<const Decision> decisions) {
    if (decisions.empty()) throw ConfigError("abstention_fraction: empty decision list");
    std::int64_t abstained = 0;
    for (const auto& d : decisions)
        if (!d.accepted()) ++abstained;
    return static_cast<double>(abstained) / static_cast<double>(decisions.size());
}

double false_alarm_fraction(std::span<const AlertPair> pairs) {
    if (pairs.empty()) throw ConfigError("false_alarm_fraction: empty pair list");
    std::int64_t fa = 0;
    for (const auto& [truth, pred] : pairs) {
        if (pred == AlertLevel::Spray && truth != AlertLevel::Spray) ++fa;
    }
    return static_cast<double>(fa) / static_cast<double>(pairs.size());
}

}  // namespace casc
