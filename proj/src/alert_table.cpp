#include "casc/detail/alert_table.hpp"

#include <algorithm>

#include "casc/error.hpp"

namespace casc::detail {

AlertTable build_alert_table(const Dataset& dataset, const std::string& stage,
                             std::span<const double> thresholds) {
    AlertTable table;
    table.n_images = dataset.records.size();
    table.n_thresholds = thresholds.size();
    table.counts.resize(table.n_images * table.n_thresholds);
    table.alerts.resize(table.n_images * table.n_thresholds);

    std::vector<double> sorted;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& rec = dataset.records[i];
        auto it = rec.stages.find(stage);
        if (it == rec.stages.end()) {
            throw DataError("record " + rec.image_id + " lacks stage '" + stage + "'");
        }
        sorted.clear();
        for (const auto& box : it->second) sorted.push_back(box.confidence);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t t = 0; t < thresholds.size(); ++t) {
            // Count of confidences strictly greater than the threshold; the
            // same comparison partition() uses.
            auto ub = std::upper_bound(sorted.begin(), sorted.end(), thresholds[t]);
            const auto n = static_cast<std::uint32_t>(sorted.end() - ub);
            table.counts[i * table.n_thresholds + t] = n;
            table.alerts[i * table.n_thresholds + t] = alert_of_count(n);
        }
    }
    return table;
}

}  // namespace casc::detail
