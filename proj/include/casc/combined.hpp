#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "casc/dataset.hpp"
#include "casc/metrics.hpp"
#include "casc/sweep.hpp"
#include "casc/window.hpp"

namespace casc {

struct ConditionedCandidates {
    bool conditioning_empty = false;  // the phone candidate abstained on zero images
    std::vector<Candidate> candidates;
};

// Evaluates every grid window of the downstream stage over exactly the
// images the phone candidate abstained on. Abstention fractions of the
// returned candidates are relative to that subset.
ConditionedCandidates conditioned_cloud_candidates(const Dataset& dataset,
                                                   const Candidate& phone, const Grid& grid,
                                                   const std::string& stage = "cloud",
                                                   int workers = 1);

// Full phone -> cloud -> human evaluation of one candidate pair. Per image
// the prediction is the phone's accepted alert, else the cloud's accepted
// alert, else the ground truth (human review); the confusion matrix covers
// all N images.
struct CombinedResult {
    Window phone_window;
    Window cloud_window;
    Fraction phone_abstention;                  // over the full dataset
    std::optional<Fraction> cloud_abstention;   // over the phone-abstained subset
    ConfusionMatrix confusion;
    double mcc = 0.0;
    std::int64_t n_phone_accepted = 0;
    std::int64_t n_cloud_accepted = 0;
    std::int64_t n_human = 0;

    std::int64_t correct_count() const { return confusion.trace(); }
    // Spray issued against a non-spray truth, over all N images.
    double false_alarm_fraction() const;
};

// Throws ConfigError if the cloud candidate's evaluation set is not exactly
// the phone candidate's abstained set.
CombinedResult combined_evaluate(const Dataset& dataset, const Candidate& phone,
                                 const Candidate& cloud);

// A single downstream candidate at one window, conditioned on the phone
// candidate's abstained set.
Candidate conditioned_candidate(const Dataset& dataset, const Candidate& phone,
                                const Window& window, const std::string& stage = "cloud");

// One cell of the end-to-end performance grid.
struct CascadeCell {
    double x = 0.0;  // phone abstention bucket
    double y = 0.0;  // conditioned cloud abstention bucket
    double mcc = 0.0;
    Window phone_window;
    Window cloud_window;
    Fraction phone_abstention;
    std::optional<Fraction> cloud_abstention;
    std::int64_t n_phone_accepted = 0;
    std::int64_t n_cloud_accepted = 0;
    std::int64_t n_human = 0;
};

// Phone candidates are grouped by abstention fraction with highest-MCC
// selection; for each selection the conditioned cloud candidates are grouped
// the same way; every resulting pair yields a cell at its (phone, cloud)
// abstention buckets. Bucket collisions keep the highest combined MCC. A
// phone candidate that never abstains fills its whole x column, since no
// images reach the cloud.
std::vector<CascadeCell> combined_grid(const Dataset& dataset, const Grid& phone_grid,
                                       const Grid& cloud_grid, double bucket = 0.05,
                                       int workers = 1);

enum class CurveFamily { PhoneOnly, CloudOnly, Combined };

std::string_view family_name(CurveFamily family);

struct CurvePoint {
    double fraction = 0.0;  // phone abstention fraction (the deferral level)
    double fa_raw = 0.0;
    double fa_smoothed = 0.0;
};

struct ComparisonCurve {
    CurveFamily family = CurveFamily::PhoneOnly;
    double smooth_width = 0.0;
    bool empty_flagged = false;  // no candidate produced a point
    std::vector<CurvePoint> points;  // sorted by fraction
};

struct ComparisonOptions {
    double smooth_width = 0.05;
    // When set, the combined family is scored over phone-included images only
    // instead of filling abstentions downstream before computing FA.
    bool combined_on_phone_included_only = false;
    int workers = 1;
};

// False-alarm curves for the phone-only, cloud-only, and combined families.
// Phone candidates are grouped by abstention fraction with highest-MCC
// selection; all families build on those representatives. Phone-only: the
// representative's FA over its included images. Cloud-only: the unconditioned
// cloud candidate whose inclusion set equals the representative's (exact
// image set equality), ties resolved by lowest FA. Combined: the selected
// pipelines (one conditioned group-best cloud per conditioned fraction),
// abstentions filled by cloud then human before FA over all N images. Raw
// points are smoothed with a centered sliding window using median
// aggregation.
std::vector<ComparisonCurve> comparison_curves(const Dataset& dataset, const Grid& phone_grid,
                                               const Grid& cloud_grid,
                                               const ComparisonOptions& options = {});

// CSV matrix over the full bucket lattice; rows = phone bucket, columns =
// cloud bucket, empty cells where no candidate pair landed.
std::string export_grid(std::span<const CascadeCell> cells, double bucket);

// Long-format cell rows with window and routing provenance; exact fractions
// rendered as rationals.
std::string export_grid_cells(std::span<const CascadeCell> cells);

// Long-format rows: family, abstention_fraction, fa_raw, fa_smoothed.
std::string export_curves(std::span<const ComparisonCurve> curves);

}  // namespace casc
