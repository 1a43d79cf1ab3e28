#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "casc/dataset.hpp"

namespace casc {

// Confidence distribution for generated boxes.
struct ConfidenceDist {
    enum class Kind { Constant, Beta };
    Kind kind = Kind::Beta;
    double a = 1.0;  // Constant: the value itself; Beta: alpha
    double b = 1.0;  // Beta: beta

    static ConfidenceDist constant(double value) { return {Kind::Constant, value, 0.0}; }
    static ConfidenceDist beta(double alpha, double beta_) { return {Kind::Beta, alpha, beta_}; }
};

struct StageNoise {
    double miss_rate = 0.0;                // probability a true pest goes undetected
    double false_positive_rate = 0.0;      // Poisson rate of spurious boxes per image
    ConfidenceDist tp_confidence = ConfidenceDist::beta(8.0, 2.0);
    ConfidenceDist fp_confidence = ConfidenceDist::beta(2.0, 8.0);
};

// Fully determines a generated dataset, seed included.
struct SynthConfig {
    std::int64_t n_images = 2000;
    // Weight of truth_count == i at index i; normalized internally.
    std::vector<double> truth_count_weights;
    std::map<std::string, StageNoise> stages;
    std::uint64_t seed = 0;

    // Truth weights mirror the 698:728:667 class proportions spread over
    // counts 0..15; cloud noise is strictly lower than phone noise, with
    // confidence distributions at roughly half the phone variance.
    static SynthConfig defaults();

    void validate() const;
};

// Pure function of the config: equal configs (and seeds) yield byte-identical
// datasets. Per image, draws the truth count, then per stage detects each
// true pest with probability 1 - miss_rate and adds Poisson false positives.
Dataset generate_synthetic(const SynthConfig& config);

}  // namespace casc
