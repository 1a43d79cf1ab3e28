#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "casc/alert.hpp"

namespace casc {

// One detection produced by a stage. Confidence lies strictly inside (0, 1);
// the class tag is optional (empty string when absent) and never affects
// counting, which is class-agnostic.
struct DetectionBox {
    double confidence = 0.0;
    std::string class_tag;

    bool operator==(const DetectionBox&) const = default;
};

// One trap photo: ground-truth pest count plus per-stage detection lists.
// The "phone" stage is always present; cascade operations additionally
// require "cloud".
struct ImageRecord {
    std::string image_id;
    std::int64_t truth_count = 0;
    std::map<std::string, std::vector<DetectionBox>> stages;

    bool operator==(const ImageRecord&) const = default;
};

// Immutable after load; records are sorted by image_id.
struct Dataset {
    std::vector<ImageRecord> records;
    std::map<std::string, std::string> metadata;

    bool operator==(const Dataset&) const = default;
};

inline AlertLevel truth_alert(const ImageRecord& record) {
    return alert_of_count(static_cast<std::uint64_t>(record.truth_count));
}

// Loads a line-delimited record file (see README for the schema). Records are
// sorted by image_id; an optional leading {"meta": {...}} line fills
// metadata. Throws DataError for malformed lines (with line number),
// duplicate ids, missing truth_count, or a missing "phone" stage. In strict
// mode a confidence outside (0, 1) is an error naming the image_id; otherwise
// such boxes are dropped.
Dataset load_dataset(const std::string& path, bool strict = true);

struct LoadResult {
    Dataset dataset;
    std::int64_t dropped_boxes = 0;  // non-strict mode only
};

LoadResult load_dataset_detailed(const std::string& path, bool strict);

void save_dataset(const Dataset& dataset, const std::string& path);

std::string record_to_json_line(const ImageRecord& record);

// Truth-alert histogram, indexed by alert level. All three entries are always
// present; values sum to records.size().
std::array<std::int64_t, kAlertLevels> class_counts(const Dataset& dataset);

}  // namespace casc
