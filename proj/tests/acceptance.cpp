// Acceptance suite: exercises the end-to-end contracts and prints one
// pass/fail line per criterion. Returns the number of failures.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "casc/alert.hpp"
#include "casc/combined.hpp"
#include "casc/dataset.hpp"
#include "casc/latency_sim.hpp"
#include "casc/metrics.hpp"
#include "casc/rng.hpp"
#include "casc/stats.hpp"
#include "casc/sweep.hpp"
#include "casc/synth.hpp"
#include "casc/window.hpp"

#ifndef CASC_BIN
#error "CASC_BIN must point at the casc executable"
#endif

namespace {

namespace fs = std::filesystem;
using namespace casc;

struct CheckFailure {
    std::string message;
};

void expect(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure{message};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CASC_BIN) + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

Dataset synth_dataset(std::int64_t n, std::uint64_t seed) {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_images = n;
    cfg.seed = seed;
    return generate_synthetic(cfg);
}

Dataset crafted_always_abstain(int n) {
    Dataset ds;
    const std::int64_t truths[3] = {0, 3, 9};
    for (int i = 0; i < n; ++i) {
        ImageRecord rec;
        rec.image_id = "craft-" + std::to_string(1000 + i);
        rec.truth_count = truths[i % 3];
        std::vector<DetectionBox> boxes(9, DetectionBox{0.5, ""});
        boxes.push_back(DetectionBox{0.9, ""});
        rec.stages["phone"] = boxes;
        rec.stages["cloud"] = boxes;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

Candidate always_abstain_cloud(const Dataset& ds, const Candidate& phone) {
    std::vector<std::uint32_t> subset;
    for (std::size_t i = 0; i < phone.decisions.size(); ++i) {
        if (!phone.decisions[i].accepted()) subset.push_back(static_cast<std::uint32_t>(i));
    }
    Candidate cand{"cloud", Window(0.0, 0.0), subset, {}, {}};
    for (std::size_t k = 0; k < subset.size(); ++k) {
        cand.decisions.push_back(Decision::abstain({0, 0}));
    }
    cand.report = report_from_decisions(ds, cand.eval_index, cand.decisions);
    return cand;
}

double binary_mcc(double tp, double tn, double fp, double fn) {
    const double denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    if (denom == 0.0) return 0.0;
    return (tp * tn - fp * fn) / denom;
}

// ---------------------------------------------------------------------------

void criterion_alert_rule() {
    for (std::uint64_t c = 0; c <= 1000; ++c) {
        const AlertLevel expected =
            c == 0 ? AlertLevel::NoAction : (c <= 7 ? AlertLevel::Cautious : AlertLevel::Spray);
        expect(alert_of_count(c) == expected, "alert mismatch at count " + std::to_string(c));
    }
}

void criterion_windowing_invariants() {
    Rng rng(20240801);
    for (int iter = 0; iter < 10000; ++iter) {
        const std::size_t len = rng.next_u64() % 31;
        std::vector<double> confs(len);
        for (auto& c : confs) c = rng.uniform01_open();
        double a = rng.uniform01() * 0.999;
        double b = rng.uniform01() * 0.999;
        if (a > b) std::swap(a, b);
        const Window w(a, b);

        const Partition p = partition(confs, w);
        expect(p.u <= p.l, "u > l");

        const Decision d = decide(confs, w);
        expect(d.accepted() == (alert_of_count(p.l) == alert_of_count(p.u)),
               "accept rule violated");

        std::vector<double> shuffled = confs;
        for (std::size_t k = shuffled.size(); k > 1; --k) {
            std::swap(shuffled[k - 1], shuffled[rng.next_u64() % k]);
        }
        expect(decide(shuffled, w) == d, "permutation changed the decision");

        const double t = rng.uniform01() * 0.999;
        expect(decide(confs, Window(t, t)).accepted(), "degenerate window abstained");

        const double wide_lo = w.lower() * rng.uniform01();
        const double wide_up = w.upper() + (0.999 - w.upper()) * rng.uniform01();
        if (!d.accepted()) {
            expect(!decide(confs, Window(wide_lo, wide_up)).accepted(),
                   "widening un-abstained an image");
        }
    }
}

void criterion_mcc_oracle() {
    Rng rng(555);
    int checked = 0;
    while (checked < 1000) {
        const int i = static_cast<int>(rng.next_u64() % 3);
        int j = static_cast<int>(rng.next_u64() % 3);
        if (i == j) continue;
        ConfusionMatrix m;
        m.cells[i][i] = static_cast<std::int64_t>(rng.next_u64() % 25);
        m.cells[i][j] = static_cast<std::int64_t>(rng.next_u64() % 25);
        m.cells[j][i] = static_cast<std::int64_t>(rng.next_u64() % 25);
        m.cells[j][j] = static_cast<std::int64_t>(rng.next_u64() % 25);
        if (m.total() == 0) continue;
        const double oracle =
            binary_mcc(static_cast<double>(m.cells[j][j]), static_cast<double>(m.cells[i][i]),
                       static_cast<double>(m.cells[i][j]), static_cast<double>(m.cells[j][i]));
        expect(std::abs(mcc(m) - oracle) < 1e-12, "two-class mcc disagrees with binary formula");
        ++checked;
    }

    for (std::int64_t v : {1, 3, 17}) {
        ConfusionMatrix uniform;
        for (auto& row : uniform.cells)
            for (auto& cell : row) cell = v;
        expect(mcc(uniform) == 0.0, "uniform matrix mcc != 0");
    }
    Rng diag_rng(556);
    for (int iter = 0; iter < 100; ++iter) {
        ConfusionMatrix d;
        d.cells[0][0] = static_cast<std::int64_t>(1 + diag_rng.next_u64() % 50);
        d.cells[1][1] = static_cast<std::int64_t>(1 + diag_rng.next_u64() % 50);
        d.cells[2][2] = static_cast<std::int64_t>(diag_rng.next_u64() % 50);
        expect(std::abs(mcc(d) - 1.0) < 1e-12, "diagonal matrix mcc != 1");
    }
}

void criterion_combined_corners() {
    // Human-only corner.
    const Dataset crafted = crafted_always_abstain(33);
    const auto phone_aa = evaluate_candidate(crafted, "phone", Window(0.3, 0.8));
    const auto cloud_aa = conditioned_candidate(crafted, phone_aa, Window(0.3, 0.8));
    expect(phone_aa.report.n_abstained == 33, "crafted phone did not abstain everywhere");
    expect(cloud_aa.report.n_abstained == 33, "crafted cloud did not abstain everywhere");
    const CombinedResult human_only = combined_evaluate(crafted, phone_aa, cloud_aa);
    expect(human_only.mcc == 1.0, "human-only corner mcc != 1.0 exactly");

    // Phone-only corner.
    const Dataset ds = synth_dataset(150, 2718);
    const auto phone0 = evaluate_candidate(ds, "phone", Window(0.4, 0.4));
    expect(phone0.report.n_abstained == 0, "diagonal window abstained");
    const auto cloud_empty = conditioned_candidate(ds, phone0, Window(0.2, 0.6));
    const CombinedResult phone_only = combined_evaluate(ds, phone0, cloud_empty);
    expect(std::abs(phone_only.mcc - phone0.report.mcc) <= 1e-12,
           "zero-abstention combined mcc differs from the phone candidate");

    // Routing partition over every tested pair.
    const Dataset part = synth_dataset(100, 31415);
    const Grid grid = make_grid(0.2, 0.0, 0.8);
    for (const auto& phone : sweep_stage(part, "phone", grid)) {
        const auto cond = conditioned_cloud_candidates(part, phone, grid);
        if (cond.conditioning_empty) continue;
        for (const auto& cloud : cond.candidates) {
            const CombinedResult res = combined_evaluate(part, phone, cloud);
            expect(res.n_phone_accepted + res.n_cloud_accepted + res.n_human == 100,
                   "routing counts do not partition the dataset");
            expect(res.confusion.total() == 100, "combined confusion total != N");
        }
    }
}

void criterion_deferral_monotonicity() {
    const Dataset ds = synth_dataset(200, 6021);
    const Grid grid = make_grid(0.1, 0.0, 0.9);
    for (const auto& phone : sweep_stage(ds, "phone", grid)) {
        const auto forced = always_abstain_cloud(ds, phone);
        const std::int64_t forced_correct = combined_evaluate(ds, phone, forced).correct_count();
        const auto cond = conditioned_cloud_candidates(ds, phone, grid);
        if (cond.conditioning_empty) continue;
        for (const auto& cloud : cond.candidates) {
            expect(forced_correct >= combined_evaluate(ds, phone, cloud).correct_count(),
                   "always-abstain cloud lost correct predictions");
        }
    }
}

void criterion_figure_shapes() {
    const Dataset ds = synth_dataset(2000, 20930);
    const Grid grid = make_grid(0.05, 0.0, 0.95);

    const auto candidates = sweep_stage(ds, "phone", grid, 2);
    double max_abstention = 0.0;
    double widest_abstention = -1.0;
    for (const auto& cand : candidates) {
        max_abstention = std::max(max_abstention, cand.report.abstention_fraction);
        if (cand.window.lower() == cand.window.upper()) {
            expect(cand.report.abstention_fraction == 0.0, "diagonal window abstained");
        }
        if (cand.window.lower() == 0.0 && cand.window.upper() == grid.thresholds.back()) {
            widest_abstention = cand.report.abstention_fraction;
        }
    }
    expect(widest_abstention >= 0.0, "widest window missing from sweep");
    expect(widest_abstention == max_abstention,
           "widest window does not carry the maximal abstention");

    ComparisonOptions options;
    options.smooth_width = 0.05;
    options.workers = 2;
    const auto curves = comparison_curves(ds, grid, grid, options);
    auto mean_low_fraction = [](const ComparisonCurve& curve) {
        double sum = 0.0;
        std::int64_t n = 0;
        for (const auto& pt : curve.points) {
            if (pt.fraction < 0.2) {
                sum += pt.fa_smoothed;
                ++n;
            }
        }
        expect(n > 0, "no curve points below abstention 0.2");
        return sum / static_cast<double>(n);
    };
    double phone_mean = 0.0, combined_mean = 0.0;
    for (const auto& curve : curves) {
        if (curve.family == CurveFamily::PhoneOnly) phone_mean = mean_low_fraction(curve);
        if (curve.family == CurveFamily::Combined) combined_mean = mean_low_fraction(curve);
    }
    expect(combined_mean <= phone_mean,
           "combined family FA above phone-only at low abstention fractions");
}

void criterion_determinism() {
    const fs::path dir = "acc_tmp";
    fs::create_directories(dir);
    const std::string data = (dir / "data.jsonl").string();
    expect(run_cli("synth --n 400 --seed 100 --out " + data) == 0, "synth failed");
    const std::string first_synth = slurp(data);
    expect(run_cli("synth --n 400 --seed 100 --out " + data) == 0, "synth rerun failed");
    expect(first_synth == slurp(data), "synth outputs differ for the same seed");

    const std::string sweep_prefix = (dir / "sweep").string();
    std::vector<std::string> sweep_runs;
    for (int workers : {1, 4, 8}) {
        expect(run_cli("sweep --data " + data + " --step 0.05 --out-prefix " + sweep_prefix +
                       " --workers " + std::to_string(workers)) == 0,
               "sweep failed");
        sweep_runs.push_back(slurp(sweep_prefix + "_candidates.csv") +
                             slurp(sweep_prefix + "_heatmap_mcc.csv") +
                             slurp(sweep_prefix + "_heatmap_abstention_fraction.csv"));
    }
    expect(sweep_runs[0] == sweep_runs[1] && sweep_runs[1] == sweep_runs[2],
           "sweep outputs differ across worker counts");
    expect(!sweep_runs[0].empty(), "sweep produced empty outputs");

    const std::string casc_data = (dir / "casc.jsonl").string();
    expect(run_cli("synth --n 250 --seed 200 --out " + casc_data) == 0, "synth failed");
    const std::string casc_prefix = (dir / "cascade").string();
    std::vector<std::string> casc_runs;
    for (int workers : {1, 4, 8}) {
        expect(run_cli("cascade --data " + casc_data + " --step 0.1 --out-prefix " + casc_prefix +
                       " --workers " + std::to_string(workers)) == 0,
               "cascade failed");
        casc_runs.push_back(slurp(casc_prefix + "_grid.csv") + slurp(casc_prefix + "_cells.csv"));
    }
    expect(casc_runs[0] == casc_runs[1] && casc_runs[1] == casc_runs[2],
           "cascade outputs differ across worker counts");

    const std::string sim_prefix = (dir / "sim").string();
    const std::string sim_flags = " --phone-lower 0.1 --phone-upper 0.7 --cloud-lower 0.2"
                                  " --cloud-upper 0.5 --seed 77 --out-prefix ";
    expect(run_cli("simulate --data " + data + sim_flags + sim_prefix) == 0, "simulate failed");
    const std::string first = slurp(sim_prefix + "_samples.csv");
    expect(run_cli("simulate --data " + data + sim_flags + sim_prefix) == 0,
           "simulate rerun failed");
    expect(first == slurp(sim_prefix + "_samples.csv"),
           "simulate outputs differ for the same seed");
}

void criterion_simulator_calibration() {
    const double target_mean = 7.0 * 3600.0;
    const double target_mode = 12.0 * 3600.0;
    const auto mixture = fit_cloud_defaults(target_mean, target_mode);

    Rng rng(987654321);
    std::vector<double> samples;
    samples.reserve(100000);
    for (int i = 0; i < 100000; ++i) samples.push_back(sample_cloud_latency(rng, mixture));

    const double sample_mean = mean(samples);
    expect(std::abs(sample_mean - target_mean) <= 0.05 * target_mean,
           "cloud mixture mean off target: " + std::to_string(sample_mean / 3600.0) + " h");
    const std::int64_t bin = histogram_mode_bin(samples, kLatencyModeBinSeconds);
    const std::int64_t target_bin =
        static_cast<std::int64_t>(std::floor(target_mode / kLatencyModeBinSeconds));
    expect(std::llabs(bin - target_bin) <= 1,
           "cloud mixture mode bin off target: bin " + std::to_string(bin));
}

struct Criterion {
    std::string name;
    std::function<void()> fn;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"1 alert rule exact on counts 0..1000", criterion_alert_rule},
        {"2 windowing invariants over 10000 random cases", criterion_windowing_invariants},
        {"3 multiclass mcc matches the binary oracle", criterion_mcc_oracle},
        {"4 combined-evaluation corners and routing partition", criterion_combined_corners},
        {"5 deferral-to-human never loses correct predictions", criterion_deferral_monotonicity},
        {"6 figure shapes on synthetic data", criterion_figure_shapes},
        {"7 deterministic outputs across workers and reruns", criterion_determinism},
        {"8 cloud latency mixture calibration", criterion_simulator_calibration},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        try {
            criterion.fn();
            std::cout << "[PASS] " << criterion.name << "\n";
        } catch (const CheckFailure& f) {
            ++failures;
            std::cout << "[FAIL] " << criterion.name << ": " << f.message << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "[FAIL] " << criterion.name << ": unexpected error: " << e.what() << "\n";
        }
    }
    if (failures == 0) {
        std::cout << "acceptance: all " << criteria.size() << " criteria passed\n";
    } else {
        std::cout << "acceptance: " << failures << " criteria failed\n";
    }
    return failures;
}
