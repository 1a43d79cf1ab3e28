#include "casc/latency_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "casc/csv.hpp"
#include "casc/error.hpp"
#include "casc/stats.hpp"

namespace casc {

namespace {

constexpr double kDaySeconds = 86400.0;
constexpr double kHourSeconds = 3600.0;

std::int64_t mode_target_bin(double seconds) {
    return static_cast<std::int64_t>(std::floor(seconds / kLatencyModeBinSeconds));
}

bool mixture_matches_targets(std::span<const CloudComponent> mixture, double target_mean_s,
                             double target_mode_s, double mean_tolerance) {
    Rng rng(0x5EEDC10DULL);
    std::vector<double> samples;
    samples.reserve(100000);
    for (int i = 0; i < 100000; ++i) samples.push_back(sample_cloud_latency(rng, mixture));
    const double mc_mean = mean(samples);
    if (std::abs(mc_mean - target_mean_s) > mean_tolerance * target_mean_s) return false;
    const std::int64_t bin = histogram_mode_bin(samples, kLatencyModeBinSeconds);
    return std::llabs(bin - mode_target_bin(target_mode_s)) <= 1;
}

// Review may start only inside the daily window; assumes the window fits
// within one day (validated).
double align_to_schedule(double t, const HumanStage& human) {
    const double open_offset = human.schedule_start_hour * kHourSeconds;
    const double window_len = human.schedule_hours_per_day * kHourSeconds;
    const double day = std::floor(t / kDaySeconds);
    const double open = day * kDaySeconds + open_offset;
    const double close = open + window_len;
    if (t < open) return open;
    if (t >= close) return (day + 1.0) * kDaySeconds + open_offset;
    return t;
}

}  // namespace

LatencyModel LatencyModel::defaults() {
    LatencyModel model;
    model.phone_latency_s = 0.5;
    model.cloud = fit_cloud_defaults(7.0 * kHourSeconds, 12.0 * kHourSeconds);
    model.human = HumanStage{};
    return model;
}

void LatencyModel::validate() const {
    if (!(phone_latency_s > 0.0)) throw ConfigError("latency model: phone latency must be positive");
    if (cloud.empty()) throw ConfigError("latency model: cloud mixture is empty");
    double weight_sum = 0.0;
    for (const auto& comp : cloud) {
        if (!(comp.weight > 0.0)) throw ConfigError("latency model: component weights must be positive");
        if (!(comp.median_s > 0.0)) throw ConfigError("latency model: component medians must be positive");
        if (comp.sigma < 0.0) throw ConfigError("latency model: component sigma must be >= 0");
        weight_sum += comp.weight;
    }
    if (std::abs(weight_sum - 1.0) > 1e-9) {
        throw ConfigError("latency model: mixture weights must sum to 1");
    }
    if (human.reviewers < 0) throw ConfigError("latency model: reviewer count must be >= 0");
    if (human.review.median_s < 0.0) throw ConfigError("latency model: review time must be >= 0");
    if (human.review.sigma < 0.0) throw ConfigError("latency model: review sigma must be >= 0");
    if (human.review.median_s == 0.0 && human.review.sigma != 0.0) {
        throw ConfigError("latency model: zero review median requires zero sigma");
    }
    if (human.schedule_start_hour < 0.0 || human.schedule_start_hour >= 24.0) {
        throw ConfigError("latency model: schedule start hour outside [0,24)");
    }
    if (!(human.schedule_hours_per_day > 0.0) || human.schedule_hours_per_day > 24.0) {
        throw ConfigError("latency model: schedule hours per day outside (0,24]");
    }
    if (human.schedule_start_hour + human.schedule_hours_per_day > 24.0 + 1e-9) {
        throw ConfigError("latency model: schedule window must fit within one day");
    }
}

std::vector<CloudComponent> fit_cloud_defaults(double target_mean_s, double target_mode_s) {
    if (!(target_mean_s > 0.0) || !(target_mode_s > 0.0)) {
        throw ConfigError("fit_cloud_defaults: targets must be positive");
    }
    // Validate slightly tighter than the reporting tolerance so fresh draws
    // from the fitted mixture still land inside it.
    constexpr double kMeanTol = 0.04;

    if (std::abs(target_mode_s - target_mean_s) <= kLatencyModeBinSeconds / 2.0) {
        const double sigma = 0.05;
        const double median = target_mean_s / std::exp(sigma * sigma / 2.0);
        std::vector<CloudComponent> single{{1.0, median, sigma}};
        if (mixture_matches_targets(single, target_mean_s, target_mode_s, kMeanTol)) {
            return single;
        }
        throw ConfigError("fit_cloud_defaults: degenerate targets are infeasible");
    }

    const bool mode_above = target_mode_s > target_mean_s;
    const double other_sigma = 0.9;
    for (double mode_sigma : {0.04, 0.05, 0.06, 0.08, 0.10}) {
        // Pin the tight component's density mode to the target mode.
        const double mode_median = target_mode_s * std::exp(mode_sigma * mode_sigma);
        const double mode_mean = mode_median * std::exp(mode_sigma * mode_sigma / 2.0);
        const auto multipliers = mode_above
                                     ? std::vector<double>{0.25, 1.0 / 3.0, 0.2, 0.5, 1.0 / 6.0}
                                     : std::vector<double>{2.0, 3.0, 4.0};
        for (double mult : multipliers) {
            const double other_median = target_mean_s * mult;
            const double other_mean = other_median * std::exp(other_sigma * other_sigma / 2.0);
            const double denom = mode_mean - other_mean;
            if (denom == 0.0) continue;
            const double w_other = (mode_mean - target_mean_s) / denom;
            if (!(w_other > 0.0 && w_other < 1.0)) continue;
            std::vector<CloudComponent> mixture{{w_other, other_median, other_sigma},
                                                {1.0 - w_other, mode_median, mode_sigma}};
            if (mixture_matches_targets(mixture, target_mean_s, target_mode_s, kMeanTol)) {
                return mixture;
            }
        }
    }
    throw ConfigError("fit_cloud_defaults: no feasible mixture for the requested targets");
}

double sample_cloud_latency(Rng& rng, std::span<const CloudComponent> mixture) {
    double target = rng.uniform01();
    double cum = 0.0;
    for (const auto& comp : mixture) {
        cum += comp.weight;
        if (target < cum) return rng.lognormal_median(comp.median_s, comp.sigma);
    }
    const auto& last = mixture.back();
    return rng.lognormal_median(last.median_s, last.sigma);
}

std::string_view route_name(Route route) {
    switch (route) {
        case Route::Phone: return "phone";
        case Route::Cloud: return "cloud";
        case Route::Human: return "human";
    }
    return "?";
}

SimReport simulate(const Dataset& dataset, const Candidate& phone, const Candidate& cloud,
                   const LatencyModel& model, std::uint64_t seed) {
    model.validate();
    const std::size_t n = dataset.records.size();
    if (n == 0) throw DataError("simulate: dataset is empty");
    if (phone.eval_index.size() != n || phone.decisions.size() != n) {
        throw ConfigError("simulate: phone candidate does not cover the dataset");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (phone.eval_index[i] != i) {
            throw ConfigError("simulate: phone candidate does not cover the dataset");
        }
    }
    std::vector<std::uint32_t> abstained;
    for (std::size_t i = 0; i < n; ++i) {
        if (!phone.decisions[i].accepted()) abstained.push_back(static_cast<std::uint32_t>(i));
    }
    if (cloud.eval_index.size() != abstained.size() ||
        !std::equal(cloud.eval_index.begin(), cloud.eval_index.end(), abstained.begin())) {
        throw ConfigError("simulate: cloud candidate is not conditioned on the phone candidate");
    }

    SimReport report;
    report.latency_s.assign(n, model.phone_latency_s);
    report.route.assign(n, Route::Phone);
    for (std::size_t k = 0; k < cloud.eval_index.size(); ++k) {
        report.route[cloud.eval_index[k]] =
            cloud.decisions[k].accepted() ? Route::Cloud : Route::Human;
    }
    for (Route r : report.route) {
        if (r == Route::Phone) ++report.n_phone;
        else if (r == Route::Cloud) ++report.n_cloud;
        else ++report.n_human;
    }
    if (report.n_human > 0 && model.human.reviewers == 0) {
        throw ConfigError("simulate: human-routed images but zero reviewers configured");
    }

    Rng rng(seed);
    struct QueueEntry {
        double arrival;
        std::uint32_t image;
    };
    std::vector<QueueEntry> queue;
    for (std::size_t i = 0; i < n; ++i) {
        if (report.route[i] == Route::Phone) continue;
        const double draw = sample_cloud_latency(rng, model.cloud);
        report.latency_s[i] = model.phone_latency_s + draw;
        if (report.route[i] == Route::Human) {
            queue.push_back({report.latency_s[i], static_cast<std::uint32_t>(i)});
        }
    }

    std::stable_sort(queue.begin(), queue.end(), [](const QueueEntry& a, const QueueEntry& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.image < b.image;
    });

    struct QueueEvent {
        double t;
        int delta;
    };
    std::vector<QueueEvent> events;
    std::vector<double> reviewer_free(static_cast<std::size_t>(std::max(model.human.reviewers, 1)),
                                      0.0);
    for (const auto& entry : queue) {
        ++report.queue_entered;
        events.push_back({entry.arrival, +1});
        auto free_it = std::min_element(reviewer_free.begin(), reviewer_free.end());
        const double review_time =
            model.human.review.median_s == 0.0
                ? 0.0
                : rng.lognormal_median(model.human.review.median_s, model.human.review.sigma);
        const double start = align_to_schedule(std::max(entry.arrival, *free_it), model.human);
        const double finish = start + review_time;
        *free_it = finish;
        events.push_back({start, -1});
        ++report.queue_served;
        report.latency_s[entry.image] = finish;
        ++report.reviews_per_day[static_cast<std::int64_t>(std::floor(finish / kDaySeconds))];
    }

    std::stable_sort(events.begin(), events.end(), [](const QueueEvent& a, const QueueEvent& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.delta > b.delta;  // arrivals before starts at the same instant
    });
    std::int64_t depth = 0;
    for (const auto& ev : events) {
        depth += ev.delta;
        report.queue_depth.push_back({ev.t, depth});
    }

    report.mean_s = mean(report.latency_s);
    report.median_s = median(report.latency_s);
    report.p95_s = percentile(report.latency_s, 0.95);
    const std::int64_t bin = histogram_mode_bin(report.latency_s, kLatencyModeBinSeconds);
    report.mode_s = (static_cast<double>(bin) + 0.5) * kLatencyModeBinSeconds;
    return report;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("latency config: bad numeric value for " + key + ": " + value);
    }
}

}  // namespace

LatencyModel load_latency_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open latency config: " + path);

    LatencyModel model = LatencyModel::defaults();
    model.cloud.clear();
    std::map<int, CloudComponent> components;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("latency config line " + std::to_string(line_no) +
                              ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "phone.latency_seconds") {
            model.phone_latency_s = parse_double(key, value);
        } else if (key == "human.reviewers") {
            model.human.reviewers = static_cast<int>(parse_double(key, value));
        } else if (key == "human.review_median_seconds") {
            model.human.review.median_s = parse_double(key, value);
        } else if (key == "human.review_sigma") {
            model.human.review.sigma = parse_double(key, value);
        } else if (key == "human.schedule_start_hour") {
            model.human.schedule_start_hour = parse_double(key, value);
        } else if (key == "human.schedule_hours_per_day") {
            model.human.schedule_hours_per_day = parse_double(key, value);
        } else if (key.rfind("cloud.", 0) == 0) {
            const auto rest = key.substr(6);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) {
                throw ConfigError("latency config: unknown key " + key);
            }
            int idx = 0;
            try {
                idx = std::stoi(rest.substr(0, dot));
            } catch (const std::exception&) {
                throw ConfigError("latency config: bad component index in " + key);
            }
            const std::string field = rest.substr(dot + 1);
            CloudComponent& comp = components[idx];
            if (field == "weight") comp.weight = parse_double(key, value);
            else if (field == "median_hours") comp.median_s = parse_double(key, value) * 3600.0;
            else if (field == "median_seconds") comp.median_s = parse_double(key, value);
            else if (field == "sigma") comp.sigma = parse_double(key, value);
            else throw ConfigError("latency config: unknown key " + key);
        } else {
            throw ConfigError("latency config: unknown key " + key);
        }
    }
    for (const auto& [idx, comp] : components) model.cloud.push_back(comp);
    if (model.cloud.empty()) model.cloud = LatencyModel::defaults().cloud;
    model.validate();
    return model;
}

std::string latency_model_to_config(const LatencyModel& model) {
    std::string out;
    out += "# casc latency model\n";
    out += "phone.latency_seconds=" + fmt_g(model.phone_latency_s, 12) + "\n";
    for (std::size_t i = 0; i < model.cloud.size(); ++i) {
        const std::string prefix = "cloud." + std::to_string(i + 1) + ".";
        out += prefix + "weight=" + fmt_g(model.cloud[i].weight, 12) + "\n";
        out += prefix + "median_hours=" + fmt_g(model.cloud[i].median_s / 3600.0, 12) + "\n";
        out += prefix + "sigma=" + fmt_g(model.cloud[i].sigma, 12) + "\n";
    }
    out += "human.reviewers=" + std::to_string(model.human.reviewers) + "\n";
    out += "human.review_median_seconds=" + fmt_g(model.human.review.median_s, 12) + "\n";
    out += "human.review_sigma=" + fmt_g(model.human.review.sigma, 12) + "\n";
    out += "human.schedule_start_hour=" + fmt_g(model.human.schedule_start_hour, 12) + "\n";
    out += "human.schedule_hours_per_day=" + fmt_g(model.human.schedule_hours_per_day, 12) + "\n";
    return out;
}

std::string sim_samples_csv(const Dataset& dataset, const SimReport& report) {
    std::string csv = "image_id,route,latency_seconds\n";
    for (std::size_t i = 0; i < report.latency_s.size(); ++i) {
        csv += csv_escape(dataset.records[i].image_id);
        csv += ',';
        csv += route_name(report.route[i]);
        csv += ',' + fmt_g(report.latency_s[i], 12);
        csv += '\n';
    }
    return csv;
}

std::string sim_summary_csv(const SimReport& report) {
    std::string csv = "key,value\n";
    auto row = [&csv](const std::string& key, const std::string& value) {
        csv += key + ',' + value + '\n';
    };
    row("n_images", std::to_string(report.latency_s.size()));
    row("n_phone", std::to_string(report.n_phone));
    row("n_cloud", std::to_string(report.n_cloud));
    row("n_human", std::to_string(report.n_human));
    row("mean_seconds", fmt_g(report.mean_s, 12));
    row("median_seconds", fmt_g(report.median_s, 12));
    row("p95_seconds", fmt_g(report.p95_s, 12));
    row("mode_seconds", fmt_g(report.mode_s, 12));
    row("mean_hours", fmt_g(report.mean_s / 3600.0, 12));
    row("median_hours", fmt_g(report.median_s / 3600.0, 12));
    row("p95_hours", fmt_g(report.p95_s / 3600.0, 12));
    row("mode_hours", fmt_g(report.mode_s / 3600.0, 12));
    row("queue_entered", std::to_string(report.queue_entered));
    row("queue_served", std::to_string(report.queue_served));
    std::int64_t max_depth = 0;
    for (const auto& pt : report.queue_depth) max_depth = std::max(max_depth, pt.depth);
    row("max_queue_depth", std::to_string(max_depth));
    std::int64_t busiest = 0;
    for (const auto& [day, count] : report.reviews_per_day) busiest = std::max(busiest, count);
    row("busiest_day_reviews", std::to_string(busiest));
    return csv;
}

}  // namespace casc
