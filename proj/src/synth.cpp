#include "casc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "casc/error.hpp"
#include "casc/rng.hpp"

namespace casc {

namespace {

double clamp_open_unit(double c) {
    return std::min(1.0 - 1e-12, std::max(1e-12, c));
}

double draw_confidence(Rng& rng, const ConfidenceDist& dist) {
    switch (dist.kind) {
        case ConfidenceDist::Kind::Constant: return dist.a;
        case ConfidenceDist::Kind::Beta: return clamp_open_unit(rng.beta(dist.a, dist.b));
    }
    return 0.5;
}

void validate_dist(const ConfidenceDist& dist, const std::string& what) {
    switch (dist.kind) {
        case ConfidenceDist::Kind::Constant:
            if (!(dist.a > 0.0 && dist.a < 1.0)) {
                throw ConfigError(what + ": constant confidence must lie in (0,1)");
            }
            return;
        case ConfidenceDist::Kind::Beta:
            if (!(dist.a > 0.0) || !(dist.b > 0.0)) {
                throw ConfigError(what + ": beta parameters must be positive");
            }
            return;
    }
    throw ConfigError(what + ": unknown distribution kind");
}

}  // namespace

SynthConfig SynthConfig::defaults() {
    SynthConfig cfg;
    cfg.truth_count_weights.assign(16, 0.0);
    cfg.truth_count_weights[0] = 698.0;
    for (int c = 1; c <= 7; ++c) cfg.truth_count_weights[c] = 728.0 / 7.0;
    for (int c = 8; c <= 15; ++c) cfg.truth_count_weights[c] = 667.0 / 8.0;

    StageNoise phone;
    phone.miss_rate = 0.15;
    phone.false_positive_rate = 1.0;
    phone.tp_confidence = ConfidenceDist::beta(8.0, 2.0);
    phone.fp_confidence = ConfidenceDist::beta(2.0, 8.0);

    StageNoise cloud;
    cloud.miss_rate = 0.05;
    cloud.false_positive_rate = 0.3;
    cloud.tp_confidence = ConfidenceDist::beta(16.8, 4.2);
    cloud.fp_confidence = ConfidenceDist::beta(4.2, 16.8);

    cfg.stages["phone"] = phone;
    cfg.stages["cloud"] = cloud;
    return cfg;
}

void SynthConfig::validate() const {
    if (n_images <= 0) throw ConfigError("synth: n_images must be positive");
    if (truth_count_weights.empty()) throw ConfigError("synth: truth_count_weights is empty");
    double sum = 0.0;
    for (double w : truth_count_weights) {
        if (w < 0.0 || !std::isfinite(w)) throw ConfigError("synth: negative truth-count weight");
        sum += w;
    }
    if (!(sum > 0.0)) throw ConfigError("synth: truth-count weights sum to zero");
    if (stages.empty()) throw ConfigError("synth: no stages configured");
    if (stages.find("phone") == stages.end()) {
        throw ConfigError("synth: the 'phone' stage is required");
    }
    for (const auto& [name, noise] : stages) {
        if (noise.miss_rate < 0.0 || noise.miss_rate > 1.0) {
            throw ConfigError("synth: stage " + name + " miss_rate outside [0,1]");
        }
        if (noise.false_positive_rate < 0.0 || !std::isfinite(noise.false_positive_rate)) {
            throw ConfigError("synth: stage " + name + " false_positive_rate must be >= 0");
        }
        validate_dist(noise.tp_confidence, "synth: stage " + name + " tp_confidence");
        validate_dist(noise.fp_confidence, "synth: stage " + name + " fp_confidence");
    }
}

Dataset generate_synthetic(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);

    Dataset ds;
    ds.metadata["source"] = "casc-synth";
    ds.metadata["seed"] = std::to_string(config.seed);
    ds.metadata["n_images"] = std::to_string(config.n_images);

    ds.records.reserve(static_cast<std::size_t>(config.n_images));
    for (std::int64_t i = 0; i < config.n_images; ++i) {
        ImageRecord rec;
        char buf[32];
        std::snprintf(buf, sizeof buf, "synth-%08lld", static_cast<long long>(i + 1));
        rec.image_id = buf;
        rec.truth_count = static_cast<std::int64_t>(rng.categorical(config.truth_count_weights));

        for (const auto& [stage, noise] : config.stages) {
            std::vector<DetectionBox> boxes;
            for (std::int64_t p = 0; p < rec.truth_count; ++p) {
                if (rng.uniform01() < noise.miss_rate) continue;
                DetectionBox box;
                box.confidence = draw_confidence(rng, noise.tp_confidence);
                box.class_tag = (p % 2 == 0) ? "pbw" : "abw";
                boxes.push_back(std::move(box));
            }
            const std::uint64_t n_fp = rng.poisson(noise.false_positive_rate);
            for (std::uint64_t f = 0; f < n_fp; ++f) {
                DetectionBox box;
                box.confidence = draw_confidence(rng, noise.fp_confidence);
                boxes.push_back(std::move(box));
            }
            rec.stages.emplace(stage, std::move(boxes));
        }
        ds.records.push_back(std::move(rec));
    }
    // Zero-padded ids make generation order the sorted order already.
    return ds;
}

}  // namespace casc
