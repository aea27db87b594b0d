#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace iqa {

enum class Perspective { close_up, long_distance };
enum class RenderMode { real_time, offline };

std::string to_string(Perspective p);
std::string to_string(RenderMode m);

/// One detected object: either a confidence in [0,1] or a below-threshold
/// marker carrying the detector's reporting threshold.
struct DetectionRecord {
    std::string label;
    std::optional<double> confidence;
    std::optional<double> below_threshold;
};

struct DetectionSet {
    std::string detector;
    Perspective perspective = Perspective::close_up;
    RenderMode render_mode = RenderMode::real_time;
    std::vector<DetectionRecord> records;
};

DetectionSet parse_detections(const nlohmann::json& j);
DetectionSet load_detections(const std::string& path);

/// One side of a comparison cell, in percent.
struct ConfidenceCell {
    enum class Kind { value, below_threshold, missing };
    Kind kind = Kind::missing;
    double percent = 0.0;  // confidence or threshold, as percent
};

/// Delta in percentage points (offline - real-time). Below-threshold inputs
/// turn the delta into a bound; two unknowns make it unknown.
struct DeltaCell {
    enum class Kind { value, lower_bound, upper_bound, unknown };
    Kind kind = Kind::unknown;
    double pp = 0.0;
};

struct DeltaRow {
    std::string label;
    ConfidenceCell rt;
    ConfidenceCell off;
    DeltaCell delta;
};

struct DeltaTable {
    std::string detector;
    Perspective perspective = Perspective::close_up;
    std::vector<DeltaRow> rows;  // sorted by class label
};

/// Builds the per-class confidence comparison. Multiple detections of one
/// class collapse to the maximum confidence; classes present on only one
/// side get a missing marker. Detector/perspective mismatches are errors.
DeltaTable confidence_delta_table(const DetectionSet& rt, const DetectionSet& off);

std::string render_detection_csv(const DeltaTable& table);
std::string render_detection_text(const DeltaTable& table);

/// JSON form carrying the table plus both full input record lists.
nlohmann::json render_detection_json(const DeltaTable& table, const DetectionSet& rt,
                                     const DetectionSet& off);

}  // namespace iqa
