#include "iqa/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace iqa {

namespace {

using nlohmann::json;

Perspective parse_perspective(const std::string& s) {
    if (s == "close_up") return Perspective::close_up;
    if (s == "long_distance") return Perspective::long_distance;
    throw std::runtime_error("unknown perspective '" + s +
                             "' (expected close_up or long_distance)");
}

RenderMode parse_render_mode(const std::string& s) {
    if (s == "real_time") return RenderMode::real_time;
    if (s == "offline") return RenderMode::offline;
    throw std::runtime_error("unknown render_mode '" + s + "' (expected real_time or offline)");
}

// "88.5" style: one decimal place.
std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string cell_str(const ConfidenceCell& c) {
    switch (c.kind) {
        case ConfidenceCell::Kind::value: return pct(c.percent);
        case ConfidenceCell::Kind::below_threshold: return "<" + pct(c.percent);
        case ConfidenceCell::Kind::missing: return "missing";
    }
    return "?";
}

std::string delta_str(const DeltaCell& d, bool signed_value) {
    char buf[32];
    switch (d.kind) {
        case DeltaCell::Kind::value:
            if (signed_value) {
                std::snprintf(buf, sizeof(buf), "%+.1f", d.pp);
                return buf;
            }
            return pct(d.pp);
        case DeltaCell::Kind::lower_bound: return ">" + pct(d.pp);
        case DeltaCell::Kind::upper_bound: return "<" + pct(d.pp);
        case DeltaCell::Kind::unknown: return "n/a";
    }
    return "?";
}

json record_to_json(const DetectionRecord& r) {
    json j;
    j["class"] = r.label;
    if (r.confidence) j["confidence"] = *r.confidence;
    if (r.below_threshold) j["below_threshold"] = *r.below_threshold;
    return j;
}

json set_to_json(const DetectionSet& s) {
    json j;
    j["detector"] = s.detector;
    j["perspective"] = to_string(s.perspective);
    j["render_mode"] = to_string(s.render_mode);
    j["detections"] = json::array();
    for (const DetectionRecord& r : s.records) j["detections"].push_back(record_to_json(r));
    return j;
}

// Max confidence per class; below-threshold markers only count when no
// numeric confidence exists for the class.
std::map<std::string, ConfidenceCell> collapse(const DetectionSet& s) {
    std::map<std::string, ConfidenceCell> cells;
    for (const DetectionRecord& r : s.records) {
        ConfidenceCell& cell = cells[r.label];
        if (r.confidence) {
            const double p = *r.confidence * 100.0;
            if (cell.kind != ConfidenceCell::Kind::value || p > cell.percent) {
                cell = {ConfidenceCell::Kind::value, p};
            }
        } else {
            const double p = *r.below_threshold * 100.0;
            if (cell.kind == ConfidenceCell::Kind::missing) {
                cell = {ConfidenceCell::Kind::below_threshold, p};
            } else if (cell.kind == ConfidenceCell::Kind::below_threshold) {
                cell.percent = std::max(cell.percent, p);
            }
        }
    }
    return cells;
}

DeltaCell make_delta(const ConfidenceCell& rt, const ConfidenceCell& off) {
    using K = ConfidenceCell::Kind;
    if (rt.kind == K::missing || off.kind == K::missing) return {DeltaCell::Kind::unknown, 0.0};
    if (rt.kind == K::value && off.kind == K::value) {
        return {DeltaCell::Kind::value, off.percent - rt.percent};
    }
    if (rt.kind == K::below_threshold && off.kind == K::value) {
        // rt < t  =>  delta > off - t
        return {DeltaCell::Kind::lower_bound, off.percent - rt.percent};
    }
    if (rt.kind == K::value && off.kind == K::below_threshold) {
        // off < t  =>  delta < t - rt
        return {DeltaCell::Kind::upper_bound, off.percent - rt.percent};
    }
    return {DeltaCell::Kind::unknown, 0.0};
}

}  // namespace

std::string to_string(Perspective p) {
    return p == Perspective::close_up ? "close_up" : "long_distance";
}

std::string to_string(RenderMode m) {
    return m == RenderMode::real_time ? "real_time" : "offline";
}

DetectionSet parse_detections(const json& j) {
    DetectionSet s;
    s.detector = j.at("detector").get<std::string>();
    s.perspective = parse_perspective(j.at("perspective").get<std::string>());
    s.render_mode = parse_render_mode(j.at("render_mode").get<std::string>());
    for (const json& d : j.at("detections")) {
        DetectionRecord r;
        r.label = d.at("class").get<std::string>();
        if (r.label.empty()) throw std::runtime_error("detection record has an empty class label");
        const bool has_conf = d.contains("confidence");
        const bool has_bt = d.contains("below_threshold");
        if (has_conf == has_bt) {
            throw std::runtime_error("detection record for '" + r.label +
                                     "' must carry exactly one of confidence/below_threshold");
        }
        const double v = has_conf ? d.at("confidence").get<double>()
                                  : d.at("below_threshold").get<double>();
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::runtime_error("confidence " + std::to_string(v) + " for '" + r.label +
                                     "' is outside [0,1]");
        }
        if (has_conf) {
            r.confidence = v;
        } else {
            r.below_threshold = v;
        }
        s.records.push_back(std::move(r));
    }
    return s;
}

DetectionSet load_detections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read detection file '" + path + "'");
    json j;
    try {
        in >> j;
        return parse_detections(j);
    } catch (const json::exception& e) {
        throw std::runtime_error("detection file '" + path + "' is malformed: " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("detection file '" + path + "': " + e.what());
    }
}

DeltaTable confidence_delta_table(const DetectionSet& rt, const DetectionSet& off) {
    if (rt.detector != off.detector) {
        throw std::runtime_error("detector mismatch: '" + rt.detector + "' vs '" + off.detector +
                                 "'");
    }
    if (rt.perspective != off.perspective) {
        throw std::runtime_error("perspective mismatch: " + to_string(rt.perspective) + " vs " +
                                 to_string(off.perspective));
    }
    const auto rt_cells = collapse(rt);
    const auto off_cells = collapse(off);

    DeltaTable table;
    table.detector = rt.detector;
    table.perspective = rt.perspective;
    std::set<std::string> labels;
    for (const auto& [label, _] : rt_cells) labels.insert(label);
    for (const auto& [label, _] : off_cells) labels.insert(label);
    for (const std::string& label : labels) {
        DeltaRow row;
        row.label = label;
        if (auto it = rt_cells.find(label); it != rt_cells.end()) row.rt = it->second;
        if (auto it = off_cells.find(label); it != off_cells.end()) row.off = it->second;
        row.delta = make_delta(row.rt, row.off);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string render_detection_csv(const DeltaTable& table) {
    std::ostringstream out;
    out << "class,rt,off,delta\n";
    for (const DeltaRow& r : table.rows) {
        out << r.label << "," << cell_str(r.rt) << "," << cell_str(r.off) << ","
            << delta_str(r.delta, /*signed_value=*/false) << "\n";
    }
    return out.str();
}

std::string render_detection_text(const DeltaTable& table) {
    std::size_t label_w = 5;
    for (const DeltaRow& r : table.rows) label_w = std::max(label_w, r.label.size());

    std::ostringstream out;
    out << table.detector << " / " << to_string(table.perspective) << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-*s  %10s  %10s  %10s\n", static_cast<int>(label_w),
                  "class", "real-time", "offline", "delta");
    out << buf;
    for (const DeltaRow& r : table.rows) {
        std::snprintf(buf, sizeof(buf), "%-*s  %10s  %10s  %10s\n", static_cast<int>(label_w),
                      r.label.c_str(), cell_str(r.rt).c_str(), cell_str(r.off).c_str(),
                      delta_str(r.delta, /*signed_value=*/true).c_str());
        out << buf;
    }
    return out.str();
}

nlohmann::json render_detection_json(const DeltaTable& table, const DetectionSet& rt,
                                     const DetectionSet& off) {
    json j;
    j["detector"] = table.detector;
    j["perspective"] = to_string(table.perspective);
    j["rows"] = json::array();
    for (const DeltaRow& r : table.rows) {
        json row;
        row["class"] = r.label;
        row["rt"] = cell_str(r.rt);
        row["off"] = cell_str(r.off);
        row["delta"] = delta_str(r.delta, /*signed_value=*/false);
        if (r.delta.kind == DeltaCell::Kind::value) row["delta_pp"] = r.delta.pp;
        j["rows"].push_back(std::move(row));
    }
    j["inputs"]["real_time"] = set_to_json(rt);
    j["inputs"]["offline"] = set_to_json(off);
    return j;
}

}  // namespace iqa
