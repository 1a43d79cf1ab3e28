#include "casc/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "casc/error.hpp"

namespace casc {

namespace {

using nlohmann::json;

std::string meta_value_to_string(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

ImageRecord parse_record(const json& j, std::size_t line_no, bool strict,
                         std::int64_t& dropped_boxes) {
    if (!j.is_object()) {
        throw DataError("line " + std::to_string(line_no) + ": record is not a JSON object");
    }
    ImageRecord rec;

    auto id_it = j.find("image_id");
    if (id_it == j.end() || !id_it->is_string() || id_it->get<std::string>().empty()) {
        throw DataError("line " + std::to_string(line_no) + ": missing or empty image_id");
    }
    rec.image_id = id_it->get<std::string>();

    auto tc_it = j.find("truth_count");
    if (tc_it == j.end() || !tc_it->is_number_integer()) {
        throw DataError("line " + std::to_string(line_no) + ": missing truth_count (image_id " +
                        rec.image_id + ")");
    }
    rec.truth_count = tc_it->get<std::int64_t>();
    if (rec.truth_count < 0) {
        throw DataError("line " + std::to_string(line_no) + ": negative truth_count (image_id " +
                        rec.image_id + ")");
    }

    auto st_it = j.find("stages");
    if (st_it == j.end() || !st_it->is_object()) {
        throw DataError("line " + std::to_string(line_no) + ": missing stages object (image_id " +
                        rec.image_id + ")");
    }
    for (auto it = st_it->begin(); it != st_it->end(); ++it) {
        if (!it.value().is_array()) {
            throw DataError("line " + std::to_string(line_no) + ": stage '" + it.key() +
                            "' is not an array (image_id " + rec.image_id + ")");
        }
        std::vector<DetectionBox> boxes;
        boxes.reserve(it.value().size());
        for (const auto& bj : it.value()) {
            if (!bj.is_object() || !bj.contains("c") || !bj["c"].is_number()) {
                throw DataError("line " + std::to_string(line_no) +
                                ": box without numeric confidence (image_id " + rec.image_id + ")");
            }
            DetectionBox box;
            box.confidence = bj["c"].get<double>();
            if (bj.contains("k")) {
                if (!bj["k"].is_string()) {
                    throw DataError("line " + std::to_string(line_no) +
                                    ": box tag is not a string (image_id " + rec.image_id + ")");
                }
                box.class_tag = bj["k"].get<std::string>();
            }
            const bool in_range = box.confidence > 0.0 && box.confidence < 1.0;
            if (!in_range) {
                if (strict) {
                    throw DataError("line " + std::to_string(line_no) + ": confidence " +
                                    std::to_string(box.confidence) +
                                    " outside (0,1) (image_id " + rec.image_id + ", stage " +
                                    it.key() + ")");
                }
                ++dropped_boxes;
                continue;
            }
            boxes.push_back(std::move(box));
        }
        rec.stages.emplace(it.key(), std::move(boxes));
    }
    if (rec.stages.find("phone") == rec.stages.end()) {
        throw DataError("line " + std::to_string(line_no) + ": missing 'phone' stage (image_id " +
                        rec.image_id + ")");
    }
    return rec;
}

}  // namespace

LoadResult load_dataset_detailed(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);

    LoadResult result;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
        }
        if (first_content_line && j.is_object() && j.contains("meta")) {
            if (!j["meta"].is_object()) {
                throw DataError("line " + std::to_string(line_no) + ": meta is not an object");
            }
            for (auto it = j["meta"].begin(); it != j["meta"].end(); ++it) {
                result.dataset.metadata[it.key()] = meta_value_to_string(it.value());
            }
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        ImageRecord rec = parse_record(j, line_no, strict, result.dropped_boxes);
        if (!seen_ids.insert(rec.image_id).second) {
            throw DataError("line " + std::to_string(line_no) + ": duplicate image_id " +
                            rec.image_id);
        }
        result.dataset.records.push_back(std::move(rec));
    }
    std::sort(result.dataset.records.begin(), result.dataset.records.end(),
              [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
    return result;
}

Dataset load_dataset(const std::string& path, bool strict) {
    return load_dataset_detailed(path, strict).dataset;
}

std::string record_to_json_line(const ImageRecord& record) {
    json stages = json::object();
    for (const auto& [stage, boxes] : record.stages) {
        json arr = json::array();
        for (const auto& box : boxes) {
            json bj;
            bj["c"] = box.confidence;
            if (!box.class_tag.empty()) bj["k"] = box.class_tag;
            arr.push_back(std::move(bj));
        }
        stages[stage] = std::move(arr);
    }
    json j;
    j["image_id"] = record.image_id;
    j["truth_count"] = record.truth_count;
    j["stages"] = std::move(stages);
    return j.dump();
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file: " + path);
    if (!dataset.metadata.empty()) {
        json meta = json::object();
        for (const auto& [k, v] : dataset.metadata) meta[k] = v;
        json line;
        line["meta"] = std::move(meta);
        out << line.dump() << '\n';
    }
    for (const auto& rec : dataset.records) {
        out << record_to_json_line(rec) << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::array<std::int64_t, kAlertLevels> class_counts(const Dataset& dataset) {
    if (dataset.records.empty()) throw DataError("class_counts: dataset is empty");
    std::array<std::int64_t, kAlertLevels> counts{0, 0, 0};
    for (const auto& rec : dataset.records) {
        ++counts[alert_index(truth_alert(rec))];
    }
    return counts;
}

}  // namespace casc
