#include "iqa/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "iqa/image_io.hpp"

namespace iqa {

namespace {

using nlohmann::json;

const std::vector<std::string> kKnownMetrics = {"mse", "psnr", "ssim", "niqe"};

std::string num4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string entry_str(const MetricEntry& e) {
    switch (e.kind) {
        case MetricEntry::Kind::value: return num4(e.value);
        case MetricEntry::Kind::identical: return "inf";
        case MetricEntry::Kind::error: return "n/a";
    }
    return "?";
}

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw std::runtime_error("unknown key '" + key + "' in " + where);
        }
    }
}

SsimParams parse_ssim_config(const json& j) {
    require_keys(j, {"mode", "dynamic_range", "k1", "k2", "window_size", "window_sigma"},
                 "ssim config");
    SsimParams p;
    if (j.contains("mode")) {
        const std::string mode = j.at("mode").get<std::string>();
        if (mode == "global") {
            p.mode = SsimParams::Mode::global;
        } else if (mode == "windowed") {
            p.mode = SsimParams::Mode::windowed;
        } else {
            throw std::runtime_error("unknown ssim mode '" + mode +
                                     "' (expected global or windowed)");
        }
    }
    if (j.contains("dynamic_range")) p.dynamic_range = j.at("dynamic_range").get<double>();
    if (j.contains("k1")) p.k1 = j.at("k1").get<double>();
    if (j.contains("k2")) p.k2 = j.at("k2").get<double>();
    if (j.contains("window_size")) p.window_size = j.at("window_size").get<int>();
    if (j.contains("window_sigma")) p.window_sigma = j.at("window_sigma").get<double>();
    p.validate();
    return p;
}

NiqeMetric parse_niqe_metric(const std::string& s) {
    if (s == "paper") return NiqeMetric::paper_eq7;
    if (s == "canonical") return NiqeMetric::canonical;
    throw std::runtime_error("unknown niqe metric '" + s + "' (expected paper or canonical)");
}

std::string to_string(NiqeMetric m) {
    return m == NiqeMetric::paper_eq7 ? "paper" : "canonical";
}

json ssim_config_json(const SsimParams& p) {
    return {{"mode", p.mode == SsimParams::Mode::global ? "global" : "windowed"},
            {"dynamic_range", p.dynamic_range},
            {"k1", p.k1},
            {"k2", p.k2},
            {"window_size", p.window_size},
            {"window_sigma", p.window_sigma}};
}

json config_echo(const CompareConfig& cfg) {
    json j;
    j["metrics"] = cfg.metrics;
    j["ssim"] = ssim_config_json(cfg.ssim_params);
    if (cfg.niqe) {
        j["niqe"] = {{"model", cfg.niqe->model_path},
                     {"metric", to_string(cfg.niqe->metric)},
                     {"test_only", cfg.niqe->test_only}};
    }
    return j;
}

bool selected(const std::vector<std::string>& metrics, const char* name) {
    return std::find(metrics.begin(), metrics.end(), name) != metrics.end();
}

json entry_to_json(const MetricEntry& e) {
    switch (e.kind) {
        case MetricEntry::Kind::value: return {{"value", e.value}};
        case MetricEntry::Kind::identical: return {{"flag", "identical"}};
        case MetricEntry::Kind::error: return {{"flag", "error"}, {"message", e.message}};
    }
    return {};
}

MetricEntry entry_from_json(const json& j) {
    if (j.contains("value")) return MetricEntry::of(j.at("value").get<double>());
    const std::string flag = j.at("flag").get<std::string>();
    if (flag == "identical") return MetricEntry::identical_flag();
    if (flag == "error") return MetricEntry::error_flag(j.at("message").get<std::string>());
    throw std::runtime_error("unknown metric entry flag '" + flag + "'");
}

std::string emit_csv(const MetricReport& r) {
    std::ostringstream out;
    out << "label";
    for (const std::string& col : r.columns) out << "," << col;
    out << "\n";
    for (const PairRow& row : r.rows) {
        out << row.label;
        for (const std::string& col : r.columns) {
            const auto it = row.metrics.find(col);
            out << "," << (it == row.metrics.end() ? "n/a" : entry_str(it->second));
        }
        out << "\n";
    }
    return out.str();
}

std::string emit_json(const MetricReport& r) {
    json j;
    j["columns"] = r.columns;
    j["config"] = r.config;
    j["pairs"] = json::array();
    for (const PairRow& row : r.rows) {
        json metrics;
        for (const auto& [col, entry] : row.metrics) metrics[col] = entry_to_json(entry);
        j["pairs"].push_back({{"label", row.label}, {"metrics", metrics}});
    }
    j["aggregates"] = json::object();
    for (const auto& [col, agg] : r.aggregates) {
        json a;
        a["mean"] = agg.mean ? json(*agg.mean) : json(nullptr);
        a["flagged"] = agg.flagged;
        j["aggregates"][col] = a;
    }
    return j.dump(2) + "\n";
}

std::string emit_text(const MetricReport& r) {
    std::size_t label_w = 5;
    for (const PairRow& row : r.rows) label_w = std::max(label_w, row.label.size());
    label_w = std::max(label_w, std::string("mean(numeric)").size());

    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(label_w), "label");
    out << buf;
    for (const std::string& col : r.columns) {
        std::snprintf(buf, sizeof(buf), "  %12s", col.c_str());
        out << buf;
    }
    out << "\n";
    for (const PairRow& row : r.rows) {
        std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(label_w), row.label.c_str());
        out << buf;
        for (const std::string& col : r.columns) {
            const auto it = row.metrics.find(col);
            std::snprintf(buf, sizeof(buf), "  %12s",
                          it == row.metrics.end() ? "n/a" : entry_str(it->second).c_str());
            out << buf;
        }
        out << "\n";
    }
    std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(label_w), "mean(numeric)");
    out << buf;
    for (const std::string& col : r.columns) {
        const auto it = r.aggregates.find(col);
        const std::string cell =
            (it != r.aggregates.end() && it->second.mean) ? num4(*it->second.mean) : "n/a";
        std::snprintf(buf, sizeof(buf), "  %12s", cell.c_str());
        out << buf;
    }
    out << "\n";
    int total_flagged = 0;
    for (const auto& [_, agg] : r.aggregates) total_flagged += agg.flagged;
    if (total_flagged > 0) {
        out << "flagged entries:";
        for (const auto& [col, agg] : r.aggregates) {
            if (agg.flagged > 0) out << " " << col << "=" << agg.flagged;
        }
        out << "\n";
    }

    // Table-V style NIQE block: RealTime (test render) and Offline (reference)
    // rows, one column per pair.
    const bool has_rt = std::find(r.columns.begin(), r.columns.end(), "niqe_rt") != r.columns.end();
    const bool has_off =
        std::find(r.columns.begin(), r.columns.end(), "niqe_off") != r.columns.end();
    if (has_rt) {
        out << "\n";
        std::snprintf(buf, sizeof(buf), "%-8s", "NIQE");
        out << buf;
        for (const PairRow& row : r.rows) {
            std::snprintf(buf, sizeof(buf), "  %12s", row.label.c_str());
            out << buf;
        }
        out << "\n";
        auto niqe_row = [&](const char* title, const char* col) {
            std::snprintf(buf, sizeof(buf), "%-8s", title);
            out << buf;
            for (const PairRow& row : r.rows) {
                const auto it = row.metrics.find(col);
                std::snprintf(buf, sizeof(buf), "  %12s",
                              it == row.metrics.end() ? "n/a" : entry_str(it->second).c_str());
                out << buf;
            }
            out << "\n";
        };
        niqe_row("RealTime", "niqe_rt");
        if (has_off) niqe_row("Offline", "niqe_off");
    }
    return out.str();
}

}  // namespace

void PairManifest::validate() const {
    if (pairs.empty()) throw std::runtime_error("manifest contains no pairs");
    if (metrics.empty()) throw std::runtime_error("manifest selects no metrics");
    std::set<std::string> seen;
    for (const std::string& m : metrics) {
        if (std::find(kKnownMetrics.begin(), kKnownMetrics.end(), m) == kKnownMetrics.end()) {
            throw std::runtime_error("unknown metric '" + m +
                                     "' (expected mse, psnr, ssim or niqe)");
        }
        if (!seen.insert(m).second) throw std::runtime_error("metric '" + m + "' listed twice");
    }
    for (const PairSpec& p : pairs) {
        if (p.label.empty() || p.ref_path.empty() || p.test_path.empty()) {
            throw std::runtime_error("manifest pair needs non-empty label, ref and test");
        }
    }
    ssim_params.validate();
    if (seen.count("niqe")) {
        if (!niqe || niqe->model_path.empty()) {
            throw std::runtime_error("metric 'niqe' requires a model path");
        }
    }
}

PairManifest parse_manifest(const json& j) {
    require_keys(j, {"pairs", "metrics", "ssim", "niqe"}, "manifest");
    PairManifest m;
    for (const json& p : j.at("pairs")) {
        require_keys(p, {"label", "ref", "test"}, "manifest pair");
        m.pairs.push_back({p.at("label").get<std::string>(), p.at("ref").get<std::string>(),
                           p.at("test").get<std::string>()});
    }
    if (j.contains("metrics")) {
        m.metrics = j.at("metrics").get<std::vector<std::string>>();
    } else {
        m.metrics = {"mse", "psnr", "ssim"};
    }
    if (j.contains("ssim")) m.ssim_params = parse_ssim_config(j.at("ssim"));
    if (j.contains("niqe")) {
        const json& n = j.at("niqe");
        require_keys(n, {"model", "metric", "test_only"}, "niqe config");
        NiqeReportConfig cfg;
        cfg.model_path = n.at("model").get<std::string>();
        if (n.contains("metric")) cfg.metric = parse_niqe_metric(n.at("metric").get<std::string>());
        if (n.contains("test_only")) cfg.test_only = n.at("test_only").get<bool>();
        m.niqe = cfg;
    }
    m.validate();
    return m;
}

PairManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest '" + path + "'");
    json j;
    try {
        in >> j;
        return parse_manifest(j);
    } catch (const json::exception& e) {
        throw std::runtime_error("manifest '" + path + "' is malformed: " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("manifest '" + path + "': " + e.what());
    }
}

std::vector<std::string> CompareConfig::columns() const {
    std::vector<std::string> cols;
    if (selected(metrics, "mse")) cols.push_back("mse");
    if (selected(metrics, "psnr")) cols.push_back("psnr");
    if (selected(metrics, "ssim")) cols.push_back("ssim");
    if (selected(metrics, "niqe")) {
        cols.push_back("niqe_rt");
        if (!niqe || !niqe->test_only) cols.push_back("niqe_off");
    }
    return cols;
}

PairRow compare_pair(const ImageGray& ref, const ImageGray& test, const std::string& label,
                     const CompareConfig& config) {
    PairRow row;
    row.label = label;
    auto guarded = [&](const char* col, auto&& fn) {
        try {
            row.metrics[col] = fn();
        } catch (const std::exception& e) {
            row.metrics[col] = MetricEntry::error_flag(e.what());
        }
    };
    if (selected(config.metrics, "mse")) {
        guarded("mse", [&] { return MetricEntry::of(mse(ref, test)); });
    }
    if (selected(config.metrics, "psnr")) {
        guarded("psnr", [&] {
            const PsnrValue v = psnr(ref, test, config.ssim_params.dynamic_range);
            return v.identical ? MetricEntry::identical_flag() : MetricEntry::of(v.db);
        });
    }
    if (selected(config.metrics, "ssim")) {
        guarded("ssim", [&] { return MetricEntry::of(ssim(ref, test, config.ssim_params).ssim); });
    }
    if (selected(config.metrics, "niqe")) {
        if (!config.model || !config.niqe) {
            row.metrics["niqe_rt"] = MetricEntry::error_flag("no NIQE model loaded");
            if (!config.niqe || !config.niqe->test_only) {
                row.metrics["niqe_off"] = MetricEntry::error_flag("no NIQE model loaded");
            }
        } else {
            guarded("niqe_rt", [&] {
                return MetricEntry::of(niqe_score(test, *config.model, config.niqe->metric));
            });
            if (!config.niqe->test_only) {
                guarded("niqe_off", [&] {
                    return MetricEntry::of(niqe_score(ref, *config.model, config.niqe->metric));
                });
            }
        }
    }
    return row;
}

MetricReport run_manifest(const PairManifest& manifest) {
    manifest.validate();
    CompareConfig cfg;
    cfg.metrics = manifest.metrics;
    cfg.ssim_params = manifest.ssim_params;
    cfg.niqe = manifest.niqe;

    NiqeModel model;
    if (manifest.niqe) {
        model = load_model(manifest.niqe->model_path);  // config-level failure: throws
        cfg.model = &model;
    }

    MetricReport report;
    report.columns = cfg.columns();
    report.config = config_echo(cfg);
    for (const PairSpec& p : manifest.pairs) {
        try {
            const ImageGray ref = load_image(p.ref_path);
            const ImageGray test = load_image(p.test_path);
            report.rows.push_back(compare_pair(ref, test, p.label, cfg));
        } catch (const std::exception& e) {
            PairRow row;
            row.label = p.label;
            for (const std::string& col : report.columns) {
                row.metrics[col] = MetricEntry::error_flag(e.what());
            }
            report.rows.push_back(std::move(row));
        }
    }

    for (const std::string& col : report.columns) {
        MetricAggregate agg;
        double sum = 0.0;
        int n = 0;
        for (const PairRow& row : report.rows) {
            const auto it = row.metrics.find(col);
            if (it == row.metrics.end()) continue;
            if (it->second.is_numeric()) {
                sum += it->second.value;
                ++n;
            } else {
                ++agg.flagged;
            }
        }
        if (n > 0) agg.mean = sum / n;
        report.aggregates[col] = agg;
    }
    return report;
}

std::string emit(const MetricReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::csv: return emit_csv(report);
        case ReportFormat::json: return emit_json(report);
        case ReportFormat::text: return emit_text(report);
    }
    throw std::logic_error("unreachable report format");
}

MetricReport parse_report_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
        MetricReport r;
        r.columns = j.at("columns").get<std::vector<std::string>>();
        r.config = j.at("config");
        for (const json& p : j.at("pairs")) {
            PairRow row;
            row.label = p.at("label").get<std::string>();
            for (const auto& [col, entry] : p.at("metrics").items()) {
                row.metrics[col] = entry_from_json(entry);
            }
            r.rows.push_back(std::move(row));
        }
        for (const auto& [col, a] : j.at("aggregates").items()) {
            MetricAggregate agg;
            if (!a.at("mean").is_null()) agg.mean = a.at("mean").get<double>();
            agg.flagged = a.at("flagged").get<int>();
            r.aggregates[col] = agg;
        }
        return r;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("report JSON is malformed: ") + e.what());
    }
}

bool report_has_errors(const MetricReport& report) {
    for (const PairRow& row : report.rows) {
        for (const auto& [_, entry] : row.metrics) {
            if (entry.kind == MetricEntry::Kind::error) return true;
        }
    }
    return false;
}

}  // namespace iqa
