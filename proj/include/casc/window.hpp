#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "casc/alert.hpp"
#include "casc/dataset.hpp"

namespace casc {

// A (lower, upper) confidence threshold pair, lower <= upper, both in [0, 1).
// Invalid pairs are rejected at construction so sweep code can never hold
// one. lower == upper degenerates to the standard single-threshold cull.
class Window {
public:
    Window(double lower, double upper);

    double lower() const { return lower_; }
    double upper() const { return upper_; }

    friend bool operator==(const Window& a, const Window& b) {
        return a.lower_ == b.lower_ && a.upper_ == b.upper_;
    }
    friend bool operator!=(const Window& a, const Window& b) { return !(a == b); }
    // Lexicographic (lower, upper); the tie-break order used everywhere.
    friend bool operator<(const Window& a, const Window& b) {
        if (a.lower_ != b.lower_) return a.lower_ < b.lower_;
        return a.upper_ < b.upper_;
    }

private:
    double lower_;
    double upper_;
};

// Cardinalities of the two threshold partitions: l counts boxes with
// confidence strictly greater than lower, u strictly greater than upper.
// u <= l always.
struct Partition {
    std::uint64_t l = 0;
    std::uint64_t u = 0;

    bool operator==(const Partition&) const = default;
};

// Accept(alert) when both cardinalities imply the same alert, else Abstain.
// The partition is retained for diagnostics.
class Decision {
public:
    static Decision accept(Partition p, AlertLevel alert) { return Decision(p, true, alert); }
    static Decision abstain(Partition p) { return Decision(p, false, AlertLevel::NoAction); }

    bool accepted() const { return accepted_; }
    AlertLevel alert() const { return alert_; }
    const Partition& partition() const { return partition_; }

    bool operator==(const Decision&) const = default;

private:
    Decision(Partition p, bool accepted, AlertLevel alert)
        : partition_(p), accepted_(accepted), alert_(alert) {}

    Partition partition_;
    bool accepted_;
    AlertLevel alert_;  // meaningful only when accepted_
};

Partition partition(std::span<const double> confidences, const Window& window);

Decision decide(std::span<const double> confidences, const Window& window);

// One decision per record, in dataset order. Throws DataError naming the
// image_id if any record lacks the stage.
std::vector<std::pair<std::string, Decision>> predict_stage(const Dataset& dataset,
                                                            const std::string& stage,
                                                            const Window& window);

}  // namespace casc
