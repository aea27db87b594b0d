// iqa: image quality assessment toolkit for paired render evaluation.
//
// Exit codes: 0 success, 1 any pair/operation failed, 2 usage or config error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "iqa/detection.hpp"
#include "iqa/distortion.hpp"
#include "iqa/image_io.hpp"
#include "iqa/niqe.hpp"
#include "iqa/report.hpp"

namespace fs = std::filesystem;

namespace {

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write output file '" + out_path + "'");
    out << text;
}

iqa::ReportFormat parse_format(const std::string& s) {
    if (s == "csv") return iqa::ReportFormat::csv;
    if (s == "json") return iqa::ReportFormat::json;
    if (s == "text") return iqa::ReportFormat::text;
    throw CLI::ValidationError("--format", "expected csv, json or text");
}

std::string label_from_path(const std::string& path) {
    const std::string stem = fs::path(path).stem().string();
    return stem.empty() ? path : stem;
}

int emit_report(const iqa::MetricReport& report, const std::string& format,
                const std::string& out_path) {
    write_output(iqa::emit(report, parse_format(format)), out_path);
    return iqa::report_has_errors(report) ? 1 : 0;
}

struct CompareArgs {
    std::string ref, test;
    std::vector<std::string> metrics = {"mse", "psnr", "ssim"};
    std::string ssim_mode = "global";
    std::string niqe_model;
    std::string niqe_metric = "paper";
    bool niqe_test_only = false;
    std::string format = "text";
    std::string out;
};

int run_compare(const CompareArgs& a) {
    iqa::PairManifest m;
    m.pairs.push_back({label_from_path(a.test), a.ref, a.test});
    m.metrics = a.metrics;
    if (a.ssim_mode == "windowed") {
        m.ssim_params.mode = iqa::SsimParams::Mode::windowed;
    } else if (a.ssim_mode != "global") {
        throw std::runtime_error("unknown --ssim-mode '" + a.ssim_mode + "'");
    }
    const bool wants_niqe =
        std::find(a.metrics.begin(), a.metrics.end(), "niqe") != a.metrics.end();
    if (wants_niqe) {
        iqa::NiqeReportConfig cfg;
        cfg.model_path = a.niqe_model;
        cfg.metric = a.niqe_metric == "canonical" ? iqa::NiqeMetric::canonical
                                                  : iqa::NiqeMetric::paper_eq7;
        if (a.niqe_metric != "paper" && a.niqe_metric != "canonical") {
            throw std::runtime_error("unknown --niqe-metric '" + a.niqe_metric + "'");
        }
        cfg.test_only = a.niqe_test_only;
        m.niqe = cfg;
    }
    return emit_report(iqa::run_manifest(m), a.format, a.out);
}

int run_train(const std::string& corpus_dir, const std::string& out_path, int patch_size,
              double sharpness_fraction) {
    std::vector<std::string> paths;
    for (const fs::directory_entry& e : fs::directory_iterator(corpus_dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext == ".png" || ext == ".pgm" || ext == ".ppm") paths.push_back(e.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
        throw std::runtime_error("no .png/.pgm/.ppm images found in '" + corpus_dir + "'");
    }
    std::vector<iqa::ImageGray> corpus;
    corpus.reserve(paths.size());
    for (const std::string& p : paths) corpus.push_back(iqa::load_image(p));

    iqa::NiqeParams params;
    params.patch_size = patch_size;
    params.sharpness_fraction = sharpness_fraction;
    iqa::save_model(iqa::train_model(corpus, params), out_path);
    std::cerr << "trained on " << corpus.size() << " images -> " << out_path << "\n";
    return 0;
}

int run_distort(const std::string& in_path, const std::string& out_path, const std::string& kind,
                double strength, std::uint64_t seed) {
    iqa::DistortionSpec spec;
    if (kind == "noise") {
        spec.kind = iqa::DistortionSpec::Kind::gaussian_noise;
    } else if (kind == "blur") {
        spec.kind = iqa::DistortionSpec::Kind::gaussian_blur;
    } else if (kind == "quantize") {
        spec.kind = iqa::DistortionSpec::Kind::quantize;
    } else {
        throw std::runtime_error("unknown --kind '" + kind + "' (expected noise, blur or quantize)");
    }
    spec.strength = strength;
    spec.seed = seed;
    iqa::save_image(iqa::apply_distortion(iqa::load_image(in_path), spec), out_path);
    return 0;
}

int run_detections(const std::string& rt_path, const std::string& off_path,
                   const std::string& format, const std::string& out_path) {
    const iqa::DetectionSet rt = iqa::load_detections(rt_path);
    const iqa::DetectionSet off = iqa::load_detections(off_path);
    const iqa::DeltaTable table = iqa::confidence_delta_table(rt, off);
    std::string text;
    if (format == "csv") {
        text = iqa::render_detection_csv(table);
    } else if (format == "json") {
        text = iqa::render_detection_json(table, rt, off).dump(2) + "\n";
    } else if (format == "text") {
        text = iqa::render_detection_text(table);
    } else {
        throw std::runtime_error("unknown --format '" + format + "'");
    }
    write_output(text, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Image quality metrics (MSE/PSNR/SSIM/NIQE) for paired render evaluation"};
    app.require_subcommand(1);

    CompareArgs cmp;
    CLI::App* compare = app.add_subcommand("compare", "Compare one reference/test image pair");
    compare->add_option("--ref", cmp.ref, "Reference image (offline/gold render)")->required();
    compare->add_option("--test", cmp.test, "Test image (real-time render)")->required();
    compare->add_option("--metrics", cmp.metrics, "Metrics: mse,psnr,ssim,niqe")->delimiter(',');
    compare->add_option("--ssim-mode", cmp.ssim_mode, "global|windowed");
    compare->add_option("--niqe-model", cmp.niqe_model, "NIQE model file (required with niqe)");
    compare->add_option("--niqe-metric", cmp.niqe_metric, "paper|canonical");
    compare->add_flag("--niqe-test-only", cmp.niqe_test_only, "Score only the test image");
    compare->add_option("--format", cmp.format, "csv|json|text");
    compare->add_option("--out", cmp.out, "Write the report to a file instead of stdout");

    std::string manifest_path, run_format = "text", run_out;
    CLI::App* run = app.add_subcommand("run", "Run a pair manifest and emit the metric report");
    run->add_option("--manifest", manifest_path, "Manifest JSON file")->required();
    run->add_option("--format", run_format, "csv|json|text");
    run->add_option("--out", run_out, "Write the report to a file instead of stdout");

    std::string corpus_dir, model_out;
    int patch_size = 96;
    double sharpness_fraction = 0.75;
    CLI::App* train = app.add_subcommand("train-niqe", "Train a pristine NIQE model from a corpus");
    train->add_option("--corpus", corpus_dir, "Directory of pristine images")->required();
    train->add_option("--out", model_out, "Output model file (JSON)")->required();
    train->add_option("--patch-size", patch_size, "Block edge length (default 96)");
    train->add_option("--sharpness-fraction", sharpness_fraction,
                      "Sharpness selection fraction (default 0.75)");

    std::string dist_in, dist_out, dist_kind;
    double dist_strength = 0.0;
    std::uint64_t dist_seed = 0;
    CLI::App* distort = app.add_subcommand("distort", "Apply a synthetic degradation");
    distort->add_option("--in", dist_in, "Input image")->required();
    distort->add_option("--out", dist_out, "Output image (.png or .pgm)")->required();
    distort->add_option("--kind", dist_kind, "noise|blur|quantize")->required();
    distort->add_option("--strength", dist_strength, "sigma (noise/blur) or level count")
        ->required();
    distort->add_option("--seed", dist_seed, "Noise RNG seed (default 0)");

    std::string det_rt, det_off, det_format = "text", det_out;
    CLI::App* detections =
        app.add_subcommand("detections", "Confidence delta table from detector outputs");
    detections->add_option("--rt", det_rt, "Real-time detection JSON")->required();
    detections->add_option("--off", det_off, "Offline detection JSON")->required();
    detections->add_option("--format", det_format, "csv|json|text");
    detections->add_option("--out", det_out, "Write the table to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*compare) return run_compare(cmp);
        if (*run) return emit_report(iqa::run_manifest(iqa::load_manifest(manifest_path)),
                                     run_format, run_out);
        if (*train) return run_train(corpus_dir, model_out, patch_size, sharpness_fraction);
        if (*distort) return run_distort(dist_in, dist_out, dist_kind, dist_strength, dist_seed);
        if (*detections) return run_detections(det_rt, det_off, det_format, det_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        // Config-shaped failures (bad manifest/model/options) are usage errors.
        const std::string msg = e.what();
        const bool config_error = msg.find("manifest") != std::string::npos ||
                                  msg.find("model file") != std::string::npos ||
                                  msg.find("unknown --") != std::string::npos;
        return config_error ? 2 : 1;
    }
    return 2;
}
