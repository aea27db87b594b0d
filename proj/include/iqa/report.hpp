#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iqa/fr_metrics.hpp"
#include "iqa/image.hpp"
#include "iqa/niqe.hpp"

namespace iqa {

/// One metric outcome for one pair: a number, the identical-images flag
/// (zero-MSE PSNR), or a recorded per-metric error.
struct MetricEntry {
    enum class Kind { value, identical, error };

    Kind kind = Kind::error;
    double value = 0.0;
    std::string message;

    static MetricEntry of(double v) { return {Kind::value, v, {}}; }
    static MetricEntry identical_flag() { return {Kind::identical, 0.0, {}}; }
    static MetricEntry error_flag(std::string msg) { return {Kind::error, 0.0, std::move(msg)}; }

    bool is_numeric() const { return kind == Kind::value; }
    bool operator==(const MetricEntry&) const = default;
};

struct PairRow {
    std::string label;
    std::map<std::string, MetricEntry> metrics;  // keyed by column name

    bool operator==(const PairRow&) const = default;
};

struct MetricAggregate {
    std::optional<double> mean;  // over numeric entries; empty when none
    int flagged = 0;             // entries that carried a flag instead of a number

    bool operator==(const MetricAggregate&) const = default;
};

struct MetricReport {
    std::vector<std::string> columns;  // emit order
    nlohmann::json config;             // manifest/CLI configuration echo
    std::vector<PairRow> rows;
    std::map<std::string, MetricAggregate> aggregates;

    bool operator==(const MetricReport&) const = default;
};

struct PairSpec {
    std::string label;
    std::string ref_path;   // offline / gold render
    std::string test_path;  // real-time render under evaluation
};

struct NiqeReportConfig {
    std::string model_path;
    NiqeMetric metric = NiqeMetric::paper_eq7;
    bool test_only = false;  // default scores both images (Table-V style)
};

struct PairManifest {
    std::vector<PairSpec> pairs;
    std::vector<std::string> metrics;  // subset of mse, psnr, ssim, niqe
    SsimParams ssim_params;
    std::optional<NiqeReportConfig> niqe;

    void validate() const;
};

PairManifest parse_manifest(const nlohmann::json& j);
PairManifest load_manifest(const std::string& path);

/// Resolved per-run configuration; `model` is loaded once by the caller when
/// niqe is selected.
struct CompareConfig {
    std::vector<std::string> metrics = {"mse", "psnr", "ssim"};
    SsimParams ssim_params;
    std::optional<NiqeReportConfig> niqe;
    const NiqeModel* model = nullptr;

    /// csv/text column names in canonical order for this selection.
    std::vector<std::string> columns() const;
};

/// Computes every requested metric for one pair; metric failures are
/// recorded as error entries, never thrown.
PairRow compare_pair(const ImageGray& ref, const ImageGray& test, const std::string& label,
                     const CompareConfig& config);

/// Runs every manifest pair in order. Unreadable inputs flag their row; the
/// caller turns report_has_errors into the exit status.
MetricReport run_manifest(const PairManifest& manifest);

enum class ReportFormat { csv, json, text };

std::string emit(const MetricReport& report, ReportFormat format);
MetricReport parse_report_json(const std::string& text);

bool report_has_errors(const MetricReport& report);

}  // namespace iqa
