#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "casc/dataset.hpp"
#include "casc/rng.hpp"
#include "casc/sweep.hpp"

namespace casc {

// Lognormal mixture component for the cloud round trip, parameterized by the
// median in seconds. sigma == 0 degenerates to a constant.
struct CloudComponent {
    double weight = 1.0;
    double median_s = 0.0;
    double sigma = 0.0;
};

struct ReviewTime {
    double median_s = 120.0;  // 0 means instantaneous review
    double sigma = 0.5;
};

struct HumanStage {
    int reviewers = 2;
    ReviewTime review;
    double schedule_start_hour = 9.0;    // window opening, hour of day
    double schedule_hours_per_day = 8.0; // 24 with start 0 means always open
};

struct LatencyModel {
    double phone_latency_s = 0.5;
    std::vector<CloudComponent> cloud;
    HumanStage human;

    // Phone 0.5 s; cloud mixture fitted to a 7 h mean with an almost-12 h
    // histogram mode; two reviewers working an 8 h day.
    static LatencyModel defaults();

    void validate() const;
};

// Histogram bin width used for the latency mode, pinned so the mode is
// well-defined for tests.
inline constexpr double kLatencyModeBinSeconds = 1800.0;

// Two-component connectivity mixture (a fast component plus a delayed-sync
// component) whose Monte-Carlo mean and fixed-bin histogram mode match the
// targets. A single lognormal cannot put its mode above its mean, hence the
// mixture. mode == mean (within half a bin) degenerates to one component.
// Throws ConfigError for non-positive or infeasible targets.
std::vector<CloudComponent> fit_cloud_defaults(double target_mean_s, double target_mode_s);

double sample_cloud_latency(Rng& rng, std::span<const CloudComponent> mixture);

enum class Route : std::uint8_t { Phone = 0, Cloud = 1, Human = 2 };

std::string_view route_name(Route route);

struct QueuePoint {
    double t = 0.0;
    std::int64_t depth = 0;
};

struct SimReport {
    std::vector<double> latency_s;  // per image, dataset order
    std::vector<Route> route;
    double mean_s = 0.0;
    double median_s = 0.0;
    double p95_s = 0.0;
    double mode_s = 0.0;  // center of the fullest kLatencyModeBinSeconds bin
    std::int64_t n_phone = 0;
    std::int64_t n_cloud = 0;
    std::int64_t n_human = 0;
    std::map<std::int64_t, std::int64_t> reviews_per_day;  // day index -> completions
    std::vector<QueuePoint> queue_depth;                   // waiting images over time
    std::int64_t queue_entered = 0;
    std::int64_t queue_served = 0;
};

// Seeded discrete-event pass over the routed dataset: phone-accepted images
// take the constant phone latency, cloud-accepted add a mixture draw, and
// human-routed images additionally wait in a FIFO reviewer queue that honors
// the daily schedule window (reviews start inside the window and run to
// completion). All images are submitted at t = 0.
SimReport simulate(const Dataset& dataset, const Candidate& phone, const Candidate& cloud,
                   const LatencyModel& model, std::uint64_t seed);

// key=value schema documented in the README.
LatencyModel load_latency_model(const std::string& path);
std::string latency_model_to_config(const LatencyModel& model);

std::string sim_samples_csv(const Dataset& dataset, const SimReport& report);
std::string sim_summary_csv(const SimReport& report);

}  // namespace casc
