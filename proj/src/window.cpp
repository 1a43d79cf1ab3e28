#include "casc/window.hpp"

#include "casc/error.hpp"

namespace casc {

Window::Window(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!(lower >= 0.0 && lower < 1.0) || !(upper >= 0.0 && upper < 1.0)) {
        throw ConfigError("window thresholds must lie in [0,1)");
    }
    if (lower > upper) {
        throw ConfigError("window lower bound exceeds upper bound");
    }
}

Partition partition(std::span<const double> confidences, const Window& window) {
    Partition p;
    for (double c : confidences) {
        if (c > window.lower()) ++p.l;
        if (c > window.upper()) ++p.u;
    }
    return p;
}

Decision decide(std::span<const double> confidences, const Window& window) {
    const Partition p = partition(confidences, window);
    const AlertLevel lower_alert = alert_of_count(p.l);
    const AlertLevel upper_alert = alert_of_count(p.u);
    if (lower_alert == upper_alert) return Decision::accept(p, lower_alert);
    return Decision::abstain(p);
}

std::vector<std::pair<std::string, Decision>> predict_stage(const Dataset& dataset,
                                                            const std::string& stage,
                                                            const Window& window) {
    std::vector<std::pair<std::string, Decision>> out;
    out.reserve(dataset.records.size());
    std::vector<double> confidences;
    for (const auto& rec : dataset.records) {
        auto it = rec.stages.find(stage);
        if (it == rec.stages.end()) {
            throw DataError("record " + rec.image_id + " lacks stage '" + stage + "'");
        }
        confidences.clear();
        for (const auto& box : it->second) confidences.push_back(box.confidence);
        out.emplace_back(rec.image_id, decide(confidences, window));
    }
    return out;
}

}  // namespace casc
