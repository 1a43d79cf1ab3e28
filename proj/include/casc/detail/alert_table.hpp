#pragma once

// Internal: per-image box counts and implied alerts at every grid threshold.
// Built once per (dataset, stage, thresholds) so window sweeps reduce to two
// table reads per image instead of rescanning confidence lists.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "casc/alert.hpp"
#include "casc/dataset.hpp"

namespace casc::detail {

struct AlertTable {
    std::size_t n_images = 0;
    std::size_t n_thresholds = 0;
    std::vector<std::uint32_t> counts;  // boxes with confidence > thresholds[t]
    std::vector<AlertLevel> alerts;     // alert_of_count of the same

    std::uint32_t count(std::size_t image, std::size_t t) const {
        return counts[image * n_thresholds + t];
    }
    AlertLevel alert(std::size_t image, std::size_t t) const {
        return alerts[image * n_thresholds + t];
    }
};

// Throws DataError naming the image_id if a record lacks the stage.
AlertTable build_alert_table(const Dataset& dataset, const std::string& stage,
                             std::span<const double> thresholds);

}  // namespace casc::detail
