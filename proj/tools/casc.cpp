// casc: evaluate confidence-window abstention cascades over per-image
// detection records. Subcommands cover dataset validation, synthetic
// generation, window sweeps, combined phone->cloud->human evaluation,
// false-alarm comparison curves, and deployment latency simulation.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "casc/combined.hpp"
#include "casc/csv.hpp"
#include "casc/dataset.hpp"
#include "casc/error.hpp"
#include "casc/latency_sim.hpp"
#include "casc/metrics.hpp"
#include "casc/sweep.hpp"
#include "casc/synth.hpp"
#include "casc/window.hpp"

namespace {

constexpr const char* kVersion = "casc 0.1.0";

// Exit codes: 0 ok, 1 usage, 2 data or configuration error, 3 I/O failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

std::string g_args_line;

std::string header_line(const casc::Dataset* dataset) {
    std::string line = "# ";
    line += kVersion;
    line += " | args:";
    line += g_args_line;
    if (dataset != nullptr && !dataset->metadata.empty()) {
        line += " | dataset:";
        for (const auto& [k, v] : dataset->metadata) {
            line += ' ' + k + '=' + v;
        }
    }
    line += '\n';
    return line;
}

void write_csv(const std::string& path, const casc::Dataset* dataset, const std::string& body) {
    casc::write_text_file(path, header_line(dataset) + body);
    std::cout << "wrote " << path << "\n";
}

struct GridFlags {
    double step = casc::kDefaultGridStep;
    double min = casc::kDefaultGridMin;
    double max = casc::kDefaultGridMax;

    void attach(CLI::App* cmd) {
        cmd->add_option("--step", step, "Threshold grid step")->capture_default_str();
        cmd->add_option("--min", min, "Lowest grid threshold")->capture_default_str();
        cmd->add_option("--max", max, "Highest grid threshold")->capture_default_str();
    }
    casc::Grid make() const { return casc::make_grid(step, min, max); }
};

int run_validate(const std::string& data_path, bool strict) {
    const casc::LoadResult result = casc::load_dataset_detailed(data_path, strict);
    const auto& ds = result.dataset;
    std::cout << header_line(&ds);
    std::cout << "records: " << ds.records.size() << "\n";
    if (!ds.records.empty()) {
        const auto counts = casc::class_counts(ds);
        std::cout << "class_counts:";
        for (int k = 0; k < casc::kAlertLevels; ++k) {
            std::cout << ' ' << casc::alert_name(static_cast<casc::AlertLevel>(k)) << '='
                      << counts[k];
        }
        std::cout << "\n";
        std::map<std::string, std::pair<std::int64_t, std::int64_t>> stage_stats;
        for (const auto& rec : ds.records) {
            for (const auto& [stage, boxes] : rec.stages) {
                auto& [n_records, n_boxes] = stage_stats[stage];
                ++n_records;
                n_boxes += static_cast<std::int64_t>(boxes.size());
            }
        }
        for (const auto& [stage, stats] : stage_stats) {
            std::cout << "stage " << stage << ": records=" << stats.first
                      << " boxes=" << stats.second << "\n";
        }
    }
    if (!strict) std::cout << "dropped_boxes: " << result.dropped_boxes << "\n";
    std::cout << "OK\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        // The worker count never affects output content, so it stays out of
        // the reproducibility echo.
        if (std::string(argv[i]) == "--workers") {
            ++i;
            continue;
        }
        g_args_line += std::string(" ") + argv[i];
    }

    CLI::App app{std::string(kVersion) +
                 " — abstention cascade evaluation for detection-count alerting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string data_path;
    bool strict = false;
    int workers = 1;

    // validate
    auto* validate = app.add_subcommand("validate", "Check a dataset file and print a report");
    validate->add_option("--data", data_path, "Dataset file (line-delimited records)")->required();
    validate->add_flag("--strict", strict, "Reject confidences outside (0,1)");

    // synth
    auto* synth = app.add_subcommand("synth", "Write a seeded synthetic dataset");
    std::int64_t synth_n = 2000;
    std::uint64_t seed = 0;
    std::string out_path = "dataset.jsonl";
    double phone_miss = -1.0, phone_fp = -1.0, cloud_miss = -1.0, cloud_fp = -1.0;
    synth->add_option("--n", synth_n, "Number of images")->capture_default_str();
    synth->add_option("--seed", seed, "RNG seed")->capture_default_str();
    synth->add_option("--out", out_path, "Output path")->capture_default_str();
    synth->add_option("--phone-miss", phone_miss, "Phone miss rate override")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--phone-fp", phone_fp, "Phone false positives per image override")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--cloud-miss", cloud_miss, "Cloud miss rate override")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--cloud-fp", cloud_fp, "Cloud false positives per image override")
        ->check(CLI::NonNegativeNumber);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Evaluate every grid window for one stage");
    std::string stage = "phone";
    std::string out_prefix = "sweep";
    std::vector<std::string> heatmap_metrics;
    double dec_lower = -1.0, dec_upper = -1.0;
    GridFlags sweep_grid;
    sweep->add_option("--data", data_path, "Dataset file")->required();
    sweep->add_option("--stage", stage, "Stage name")->capture_default_str();
    sweep_grid.attach(sweep);
    sweep->add_option("--metric", heatmap_metrics,
                      "Heatmap metric (repeatable; default mcc and abstention_fraction)");
    sweep->add_option("--out-prefix", out_prefix, "Output file prefix")->capture_default_str();
    sweep->add_option("--workers", workers, "Worker threads")->capture_default_str();
    sweep->add_flag("--strict", strict, "Strict dataset validation");
    sweep->add_option("--decisions-lower", dec_lower,
                      "With --decisions-upper, dump per-image decisions for this window");
    sweep->add_option("--decisions-upper", dec_upper, "See --decisions-lower");

    // cascade
    auto* cascade = app.add_subcommand("cascade", "Combined phone->cloud->human grid");
    double bucket = 0.05;
    GridFlags cascade_grid;
    cascade->add_option("--data", data_path, "Dataset file")->required();
    cascade_grid.attach(cascade);
    cascade->add_option("--bucket", bucket, "Display bucket resolution")->capture_default_str();
    cascade->add_option("--out-prefix", out_prefix, "Output file prefix")->capture_default_str();
    cascade->add_option("--workers", workers, "Worker threads")->capture_default_str();
    cascade->add_flag("--strict", strict, "Strict dataset validation");

    // compare
    auto* compare = app.add_subcommand("compare", "False-alarm comparison curves");
    double smooth_width = 0.05;
    bool phone_included_only = false;
    GridFlags compare_grid;
    compare->add_option("--data", data_path, "Dataset file")->required();
    compare_grid.attach(compare);
    compare->add_option("--smooth", smooth_width, "Sliding median window width")
        ->capture_default_str();
    compare->add_flag("--phone-included-only", phone_included_only,
                      "Score the combined family on phone-included images only");
    compare->add_option("--out", out_path, "Output CSV path")->capture_default_str();
    compare->add_option("--workers", workers, "Worker threads")->capture_default_str();
    compare->add_flag("--strict", strict, "Strict dataset validation");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Deployment latency simulation");
    double phone_lower = 0.3, phone_upper = 0.6, cloud_lower = 0.3, cloud_upper = 0.6;
    std::string model_path;
    std::string write_model_path;
    simulate->add_option("--data", data_path, "Dataset file");
    simulate->add_option("--phone-lower", phone_lower, "Phone window lower bound")
        ->capture_default_str();
    simulate->add_option("--phone-upper", phone_upper, "Phone window upper bound")
        ->capture_default_str();
    simulate->add_option("--cloud-lower", cloud_lower, "Cloud window lower bound")
        ->capture_default_str();
    simulate->add_option("--cloud-upper", cloud_upper, "Cloud window upper bound")
        ->capture_default_str();
    simulate->add_option("--model", model_path, "Latency model config (key=value file)");
    simulate->add_option("--write-model", write_model_path,
                         "Write the default latency model config to this path and exit");
    simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();
    simulate->add_option("--out-prefix", out_prefix, "Output file prefix")->capture_default_str();
    simulate->add_flag("--strict", strict, "Strict dataset validation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (validate->parsed()) {
            return run_validate(data_path, strict);
        }

        if (synth->parsed()) {
            casc::SynthConfig cfg = casc::SynthConfig::defaults();
            cfg.n_images = synth_n;
            cfg.seed = seed;
            if (phone_miss >= 0.0) cfg.stages["phone"].miss_rate = phone_miss;
            if (phone_fp >= 0.0) cfg.stages["phone"].false_positive_rate = phone_fp;
            if (cloud_miss >= 0.0) cfg.stages["cloud"].miss_rate = cloud_miss;
            if (cloud_fp >= 0.0) cfg.stages["cloud"].false_positive_rate = cloud_fp;
            casc::Dataset ds = casc::generate_synthetic(cfg);
            ds.metadata["tool"] = kVersion;
            ds.metadata["args"] = g_args_line.empty() ? "" : g_args_line.substr(1);
            casc::save_dataset(ds, out_path);
            std::cout << "wrote " << out_path << " (" << ds.records.size() << " records)\n";
            return 0;
        }

        if (sweep->parsed()) {
            const casc::Dataset ds = casc::load_dataset(data_path, strict);
            const casc::Grid grid = sweep_grid.make();
            const auto candidates = casc::sweep_stage(ds, stage, grid, workers);
            write_csv(out_prefix + "_candidates.csv", &ds, casc::candidates_csv(candidates));
            if (heatmap_metrics.empty()) heatmap_metrics = {"mcc", "abstention_fraction"};
            for (const auto& metric : heatmap_metrics) {
                write_csv(out_prefix + "_heatmap_" + metric + ".csv", &ds,
                          casc::export_heatmap(candidates, metric));
            }
            if (dec_lower >= 0.0 || dec_upper >= 0.0) {
                if (dec_lower < 0.0 || dec_upper < 0.0) {
                    throw casc::ConfigError(
                        "--decisions-lower and --decisions-upper must be given together");
                }
                const auto cand = casc::evaluate_candidate(
                    ds, stage, casc::Window(dec_lower, dec_upper));
                write_csv(out_prefix + "_decisions.csv", &ds, casc::decisions_csv(ds, cand));
            }
            return 0;
        }

        if (cascade->parsed()) {
            const casc::Dataset ds = casc::load_dataset(data_path, strict);
            const casc::Grid grid = cascade_grid.make();
            const auto cells = casc::combined_grid(ds, grid, grid, bucket, workers);
            write_csv(out_prefix + "_grid.csv", &ds, casc::export_grid(cells, bucket));
            write_csv(out_prefix + "_cells.csv", &ds, casc::export_grid_cells(cells));
            return 0;
        }

        if (compare->parsed()) {
            const casc::Dataset ds = casc::load_dataset(data_path, strict);
            const casc::Grid grid = compare_grid.make();
            casc::ComparisonOptions options;
            options.smooth_width = smooth_width;
            options.combined_on_phone_included_only = phone_included_only;
            options.workers = workers;
            const auto curves = casc::comparison_curves(ds, grid, grid, options);
            write_csv(out_path, &ds, casc::export_curves(curves));
            for (const auto& curve : curves) {
                if (curve.empty_flagged) {
                    std::cout << "note: family " << casc::family_name(curve.family)
                              << " produced no points\n";
                }
            }
            return 0;
        }

        if (simulate->parsed()) {
            if (!write_model_path.empty()) {
                casc::write_text_file(write_model_path,
                                      casc::latency_model_to_config(casc::LatencyModel::defaults()));
                std::cout << "wrote " << write_model_path << "\n";
                return 0;
            }
            if (data_path.empty()) {
                throw casc::ConfigError("simulate: --data is required unless --write-model is used");
            }
            const casc::Dataset ds = casc::load_dataset(data_path, strict);
            const casc::LatencyModel model =
                model_path.empty() ? casc::LatencyModel::defaults()
                                   : casc::load_latency_model(model_path);
            const auto phone_cand =
                casc::evaluate_candidate(ds, "phone", casc::Window(phone_lower, phone_upper));
            const auto cloud_cand = casc::conditioned_candidate(
                ds, phone_cand, casc::Window(cloud_lower, cloud_upper));
            const auto report = casc::simulate(ds, phone_cand, cloud_cand, model, seed);
            write_csv(out_prefix + "_samples.csv", &ds, casc::sim_samples_csv(ds, report));
            write_csv(out_prefix + "_summary.csv", &ds, casc::sim_summary_csv(report));
            return 0;
        }
    } catch (const casc::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const casc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
