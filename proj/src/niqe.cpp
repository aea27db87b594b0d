#include "iqa/niqe.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <utility>

namespace iqa {

namespace {

using nlohmann::json;

// Moment-ratio table for GGD/AGGD shape inversion, alpha in [0.2,10],
// step 0.001. ratio(alpha) = Gamma(1/a)*Gamma(3/a)/Gamma(2/a)^2.
struct AlphaGrid {
    std::vector<double> alpha;
    std::vector<double> ratio;      // r(alpha), monotone decreasing
    std::vector<double> inv_ratio;  // 1/r(alpha)
};

const AlphaGrid& alpha_grid() {
    static const AlphaGrid grid = [] {
        AlphaGrid g;
        const int count = 9801;  // (10 - 0.2)/0.001 + 1
        g.alpha.resize(count);
        g.ratio.resize(count);
        g.inv_ratio.resize(count);
        for (int i = 0; i < count; ++i) {
            const double a = 0.2 + 0.001 * i;
            const double r =
                std::exp(std::lgamma(1.0 / a) + std::lgamma(3.0 / a) - 2.0 * std::lgamma(2.0 / a));
            g.alpha[i] = a;
            g.ratio[i] = r;
            g.inv_ratio[i] = 1.0 / r;
        }
        return g;
    }();
    return grid;
}

double nearest_alpha(const std::vector<double>& table, double target) {
    const AlphaGrid& g = alpha_grid();
    std::size_t best = 0;
    double best_diff = std::abs(table[0] - target);
    for (std::size_t i = 1; i < table.size(); ++i) {
        const double diff = std::abs(table[i] - target);
        if (diff < best_diff) {
            best_diff = diff;
            best = i;
        }
    }
    return g.alpha[best];
}

void require_fit_samples(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("distribution fit needs at least 2 samples, got " +
                                    std::to_string(samples.size()));
    }
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) {
        throw degenerate_samples_error("samples are all identical; no shape information");
    }
}

GgdFit fit_ggd_or_fallback(std::span<const double> samples) {
    try {
        return fit_ggd(samples);
    } catch (const degenerate_samples_error&) {
        return {.shape = 10.0, .variance = 0.0};
    }
}

AggdFit fit_aggd_or_fallback(std::span<const double> samples) {
    try {
        return fit_aggd(samples);
    } catch (const degenerate_samples_error&) {
        return {.shape = 10.0, .mean = 0.0, .var_left = 0.0, .var_right = 0.0};
    }
}

// Neighbor-product orientations: row/col offsets for H, V, D1, D2.
constexpr int kShifts[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};

// 18 features for one block of an MSCN coefficient field.
void block_features(const ImageGray& coeff, int r0, int c0, int bs, double* out) {
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(bs) * bs);
    for (int r = r0; r < r0 + bs; ++r) {
        for (int c = c0; c < c0 + bs; ++c) samples.push_back(coeff(r, c));
    }
    const GgdFit g = fit_ggd_or_fallback(samples);
    out[0] = g.shape;
    out[1] = g.variance;

    std::vector<double> products;
    for (int k = 0; k < 4; ++k) {
        const int dr = kShifts[k][0];
        const int dc = kShifts[k][1];
        products.clear();
        for (int r = r0; r < r0 + bs; ++r) {
            if (r + dr >= r0 + bs) break;
            for (int c = c0; c < c0 + bs; ++c) {
                if (c + dc < c0 || c + dc >= c0 + bs) continue;
                products.push_back(coeff(r, c) * coeff(r + dr, c + dc));
            }
        }
        const AggdFit a = fit_aggd_or_fallback(products);
        out[2 + 4 * k] = a.shape;
        out[3 + 4 * k] = a.mean;
        out[4 + 4 * k] = a.var_left;
        out[5 + 4 * k] = a.var_right;
    }
}

Eigen::Map<const Eigen::Matrix<double, kNiqeFeatureCount, kNiqeFeatureCount, Eigen::RowMajor>>
cov_map(const NiqeModel& model) {
    return Eigen::Map<
        const Eigen::Matrix<double, kNiqeFeatureCount, kNiqeFeatureCount, Eigen::RowMajor>>(
        model.covariance.data());
}

void require_valid_model(const NiqeModel& model) {
    model.params.validate();
    if (model.covariance.size() !=
        static_cast<std::size_t>(kNiqeFeatureCount) * kNiqeFeatureCount) {
        throw std::invalid_argument("NIQE model covariance is not 36x36");
    }
}

}  // namespace

void NiqeParams::validate() const {
    if (patch_size < 16 || patch_size % 2 != 0) {
        throw std::invalid_argument("patch_size must be even and >= 16, got " +
                                    std::to_string(patch_size));
    }
    if (!(sharpness_fraction > 0.0 && sharpness_fraction <= 1.0)) {
        throw std::invalid_argument("sharpness_fraction must lie in (0,1]");
    }
    if (!(stabilizer > 0.0)) throw std::invalid_argument("stabilizer must be positive");
    if (window_size < 3 || window_size % 2 == 0) {
        throw std::invalid_argument("MSCN window size must be odd and >= 3");
    }
    if (!(window_sigma > 0.0)) throw std::invalid_argument("MSCN window sigma must be positive");
    if (scales != 2) {
        throw std::invalid_argument("feature extraction is fixed at 2 scales, got " +
                                    std::to_string(scales));
    }
}

MscnField mscn(const ImageGray& img, int window_size, double window_sigma, double stabilizer) {
    if (img.width() < window_size || img.height() < window_size) {
        throw std::invalid_argument("image " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + " is smaller than the " +
                                    std::to_string(window_size) + "x" +
                                    std::to_string(window_size) + " MSCN window");
    }
    const Kernel w = gaussian_kernel(window_size, window_sigma);
    const ImageGray mu = convolve_same(img, w);

    // sigma = sqrt(weighted mean of (I - mu)^2); the direct form stays exact
    // near zero where the E[I^2] - mu^2 shortcut cancels catastrophically.
    const int half = window_size / 2;
    MscnField out{ImageGray(img.width(), img.height()), ImageGray(img.width(), img.height())};
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            const double m = mu(r, c);
            double var = 0.0;
            for (int u = -half; u <= half; ++u) {
                for (int v = -half; v <= half; ++v) {
                    const double d = img.at_reflect(r + u, c + v) - m;
                    var += w.at(u + half, v + half) * d * d;
                }
            }
            const double sd = std::sqrt(var);
            out.local_sigma(r, c) = sd;
            out.coefficients(r, c) = (img(r, c) - m) / (sd + stabilizer);
        }
    }
    return out;
}

GgdFit fit_ggd(std::span<const double> samples) {
    require_fit_samples(samples);
    double abs_sum = 0.0, sq_sum = 0.0;
    for (double v : samples) {
        abs_sum += std::abs(v);
        sq_sum += v * v;
    }
    const double n = static_cast<double>(samples.size());
    const double mean_abs = abs_sum / n;
    const double mean_sq = sq_sum / n;
    if (mean_sq == 0.0) {
        throw degenerate_samples_error("samples are all zero; no shape information");
    }
    const double rho = (mean_abs * mean_abs) / mean_sq;
    return {.shape = nearest_alpha(alpha_grid().ratio, 1.0 / rho), .variance = mean_sq};
}

AggdFit fit_aggd(std::span<const double> samples) {
    require_fit_samples(samples);
    double neg_sq = 0.0, pos_sq = 0.0, abs_sum = 0.0;
    std::size_t neg_count = 0, pos_count = 0;
    for (double v : samples) {
        if (v < 0.0) {
            neg_sq += v * v;
            ++neg_count;
        } else if (v > 0.0) {
            pos_sq += v * v;
            ++pos_count;
        }
        abs_sum += std::abs(v);
    }
    if (neg_count + pos_count == 0) {
        throw degenerate_samples_error("samples are all zero; no shape information");
    }
    const double n = static_cast<double>(samples.size());
    const double sigma_l = neg_count ? std::sqrt(neg_sq / static_cast<double>(neg_count)) : 0.0;
    const double sigma_r = pos_count ? std::sqrt(pos_sq / static_cast<double>(pos_count)) : 0.0;

    const double mean_abs = abs_sum / n;
    const double mean_sq = (neg_sq + pos_sq) / n;
    const double rhat = (mean_abs * mean_abs) / mean_sq;
    double rhat_norm = rhat;
    if (sigma_r > 0.0) {
        const double gamma_hat = sigma_l / sigma_r;
        rhat_norm = rhat * ((gamma_hat * gamma_hat * gamma_hat + 1.0) * (gamma_hat + 1.0)) /
                    ((gamma_hat * gamma_hat + 1.0) * (gamma_hat * gamma_hat + 1.0));
    }
    const double alpha = nearest_alpha(alpha_grid().inv_ratio, rhat_norm);

    // eta = (sigma_r - sigma_l) * Gamma(2/a) / sqrt(Gamma(1/a)*Gamma(3/a))
    const double eta_factor = std::exp(std::lgamma(2.0 / alpha) -
                                       0.5 * (std::lgamma(1.0 / alpha) + std::lgamma(3.0 / alpha)));
    return {.shape = alpha,
            .mean = (sigma_r - sigma_l) * eta_factor,
            .var_left = sigma_l * sigma_l,
            .var_right = sigma_r * sigma_r};
}

std::vector<BlockFeatures> extract_features(const ImageGray& img, const NiqeParams& params) {
    params.validate();
    if (img.width() < params.patch_size || img.height() < params.patch_size) {
        throw std::invalid_argument("image " + std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()) + " admits no " +
                                    std::to_string(params.patch_size) + "-pixel block");
    }
    const MscnField full =
        mscn(img, params.window_size, params.window_sigma, params.stabilizer);
    const MscnField half = mscn(downsample2x(img), params.window_size, params.window_sigma,
                                params.stabilizer);

    const int bs = params.patch_size;
    const int blocks_x = img.width() / bs;
    const int blocks_y = img.height() / bs;

    std::vector<BlockFeatures> out;
    out.reserve(static_cast<std::size_t>(blocks_x) * blocks_y);
    for (int by = 0; by < blocks_y; ++by) {
        for (int bx = 0; bx < blocks_x; ++bx) {
            BlockFeatures bf;
            block_features(full.coefficients, by * bs, bx * bs, bs, bf.features.data());
            block_features(half.coefficients, by * bs / 2, bx * bs / 2, bs / 2,
                           bf.features.data() + 18);
            double sharp = 0.0;
            for (int r = by * bs; r < (by + 1) * bs; ++r) {
                for (int c = bx * bs; c < (bx + 1) * bs; ++c) sharp += full.local_sigma(r, c);
            }
            bf.sharpness = sharp / (static_cast<double>(bs) * bs);
            out.push_back(std::move(bf));
        }
    }
    return out;
}

std::vector<FeatureVector> select_sharp(const std::vector<BlockFeatures>& blocks,
                                        double fraction) {
    if (blocks.empty()) throw std::invalid_argument("no blocks to select from");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("sharpness fraction must lie in (0,1]");
    }
    std::size_t sharpest = 0;
    double max_sharp = blocks[0].sharpness;
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (blocks[i].sharpness > max_sharp) {
            max_sharp = blocks[i].sharpness;
            sharpest = i;
        }
    }
    std::vector<FeatureVector> kept;
    for (const BlockFeatures& b : blocks) {
        if (b.sharpness > fraction * max_sharp) kept.push_back(b.features);
    }
    if (kept.empty()) kept.push_back(blocks[sharpest].features);
    return kept;
}

NiqeModel fit_model_from_features(const std::vector<FeatureVector>& vectors,
                                  const NiqeParams& params) {
    params.validate();
    if (vectors.size() < 2) {
        throw std::invalid_argument("pristine model needs at least 2 feature vectors, got " +
                                    std::to_string(vectors.size()));
    }
    const double n = static_cast<double>(vectors.size());

    NiqeModel model;
    model.params = params;
    model.mean.fill(0.0);
    for (const FeatureVector& v : vectors) {
        for (int d = 0; d < kNiqeFeatureCount; ++d) model.mean[d] += v[d];
    }
    for (double& m : model.mean) m /= n;

    model.covariance.assign(static_cast<std::size_t>(kNiqeFeatureCount) * kNiqeFeatureCount, 0.0);
    for (const FeatureVector& v : vectors) {
        for (int i = 0; i < kNiqeFeatureCount; ++i) {
            const double di = v[i] - model.mean[i];
            for (int j = i; j < kNiqeFeatureCount; ++j) {
                model.covariance[static_cast<std::size_t>(i) * kNiqeFeatureCount + j] +=
                    di * (v[j] - model.mean[j]);
            }
        }
    }
    for (int i = 0; i < kNiqeFeatureCount; ++i) {
        for (int j = i; j < kNiqeFeatureCount; ++j) {
            const double c =
                model.covariance[static_cast<std::size_t>(i) * kNiqeFeatureCount + j] / (n - 1.0);
            model.covariance[static_cast<std::size_t>(i) * kNiqeFeatureCount + j] = c;
            model.covariance[static_cast<std::size_t>(j) * kNiqeFeatureCount + i] = c;
        }
    }

    double trace = 0.0;
    for (int i = 0; i < kNiqeFeatureCount; ++i) trace += model.cov(i, i);
    if (trace == 0.0) {
        throw std::invalid_argument("degenerate corpus: every feature vector is identical");
    }
    const double ridge = 1e-6 * trace / kNiqeFeatureCount;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_map(model),
                                                       Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < ridge) {
        for (int i = 0; i < kNiqeFeatureCount; ++i) {
            model.covariance[static_cast<std::size_t>(i) * kNiqeFeatureCount + i] += ridge;
        }
    }
    return model;
}

NiqeModel train_model(std::span<const ImageGray> corpus, const NiqeParams& params) {
    params.validate();
    std::vector<FeatureVector> pooled;
    for (const ImageGray& img : corpus) {
        const std::vector<BlockFeatures> blocks = extract_features(img, params);
        for (FeatureVector& v : select_sharp(blocks, params.sharpness_fraction)) {
            pooled.push_back(v);
        }
    }
    if (pooled.size() < 2) {
        throw std::invalid_argument("pristine corpus yields fewer than 2 feature vectors (" +
                                    std::to_string(pooled.size()) + ")");
    }
    return fit_model_from_features(pooled, params);
}

double score_features(const std::vector<FeatureVector>& features, const NiqeModel& model,
                      NiqeMetric metric) {
    require_valid_model(model);
    if (features.empty()) throw std::invalid_argument("no feature vectors to score");

    if (metric == NiqeMetric::paper_eq7) {
        for (int d = 0; d < kNiqeFeatureCount; ++d) {
            if (!(model.cov(d, d) > 0.0)) {
                throw std::invalid_argument("model covariance diagonal is not positive");
            }
        }
        double total = 0.0;
        for (const FeatureVector& v : features) {
            for (int d = 0; d < kNiqeFeatureCount; ++d) {
                const double diff = v[d] - model.mean[d];
                total += diff * diff / model.cov(d, d);
            }
        }
        return total / static_cast<double>(features.size());
    }

    // canonical: symmetric-Mahalanobis distance between the pristine model
    // and the Gaussian fitted to the test blocks.
    if (features.size() < 2) {
        throw std::invalid_argument("canonical NIQE metric needs at least 2 blocks, got " +
                                    std::to_string(features.size()));
    }
    const double n = static_cast<double>(features.size());
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(kNiqeFeatureCount);
    for (const FeatureVector& v : features) {
        nu += Eigen::Map<const Eigen::VectorXd>(v.data(), kNiqeFeatureCount);
    }
    nu /= n;
    Eigen::MatrixXd cov2 = Eigen::MatrixXd::Zero(kNiqeFeatureCount, kNiqeFeatureCount);
    for (const FeatureVector& v : features) {
        const Eigen::VectorXd d =
            Eigen::Map<const Eigen::VectorXd>(v.data(), kNiqeFeatureCount) - nu;
        cov2.noalias() += d * d.transpose();
    }
    cov2 /= (n - 1.0);

    const Eigen::MatrixXd pooled = (Eigen::MatrixXd(cov_map(model)) + cov2) / 2.0;
    const Eigen::VectorXd diff =
        Eigen::Map<const Eigen::VectorXd>(model.mean.data(), kNiqeFeatureCount) - nu;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw std::runtime_error("pooled covariance is singular after regularization");
    }
    const double quad = diff.dot(ldlt.solve(diff));
    if (!std::isfinite(quad) || quad < -1e-9) {
        throw std::runtime_error("pooled covariance solve failed");
    }
    return std::sqrt(std::max(0.0, quad));
}

double niqe_score(const ImageGray& img, const NiqeModel& model, NiqeMetric metric) {
    require_valid_model(model);
    const std::vector<BlockFeatures> blocks = extract_features(img, model.params);
    return score_features(select_sharp(blocks, model.params.sharpness_fraction), model, metric);
}

void save_model(const NiqeModel& model, const std::string& path) {
    require_valid_model(model);
    json j;
    j["version"] = 1;
    j["params"] = {{"patch_size", model.params.patch_size},
                   {"sharpness_fraction", model.params.sharpness_fraction},
                   {"stabilizer", model.params.stabilizer},
                   {"window", {{"size", model.params.window_size},
                               {"sigma", model.params.window_sigma}}},
                   {"scales", model.params.scales}};
    j["mean"] = model.mean;
    json cov = json::array();
    for (int i = 0; i < kNiqeFeatureCount; ++i) {
        json row = json::array();
        for (int k = 0; k < kNiqeFeatureCount; ++k) row.push_back(model.cov(i, k));
        cov.push_back(std::move(row));
    }
    j["covariance"] = std::move(cov);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("failed writing model file '" + path + "'");
}

NiqeModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read model file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("model file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (j.at("version").get<int>() != 1) {
            throw std::runtime_error("unsupported model version " + j.at("version").dump());
        }
        NiqeModel model;
        const json& p = j.at("params");
        model.params.patch_size = p.at("patch_size").get<int>();
        model.params.sharpness_fraction = p.at("sharpness_fraction").get<double>();
        model.params.stabilizer = p.at("stabilizer").get<double>();
        model.params.window_size = p.at("window").at("size").get<int>();
        model.params.window_sigma = p.at("window").at("sigma").get<double>();
        model.params.scales = p.at("scales").get<int>();
        model.params.validate();

        const json& mean = j.at("mean");
        if (!mean.is_array() || mean.size() != kNiqeFeatureCount) {
            throw std::runtime_error("model mean must have 36 entries");
        }
        for (int d = 0; d < kNiqeFeatureCount; ++d) model.mean[d] = mean[d].get<double>();

        const json& cov = j.at("covariance");
        if (!cov.is_array() || cov.size() != kNiqeFeatureCount) {
            throw std::runtime_error("model covariance must be 36x36");
        }
        model.covariance.resize(static_cast<std::size_t>(kNiqeFeatureCount) * kNiqeFeatureCount);
        for (int i = 0; i < kNiqeFeatureCount; ++i) {
            const json& row = cov[i];
            if (!row.is_array() || row.size() != kNiqeFeatureCount) {
                throw std::runtime_error("model covariance must be 36x36");
            }
            for (int k = 0; k < kNiqeFeatureCount; ++k) {
                model.covariance[static_cast<std::size_t>(i) * kNiqeFeatureCount + k] =
                    row[k].get<double>();
            }
        }
        for (int i = 0; i < kNiqeFeatureCount; ++i) {
            for (int k = i + 1; k < kNiqeFeatureCount; ++k) {
                if (std::abs(model.cov(i, k) - model.cov(k, i)) > 1e-10) {
                    throw std::runtime_error("model covariance is not symmetric");
                }
            }
        }
        return model;
    } catch (const json::exception& e) {
        throw std::runtime_error("model file '" + path + "' has an invalid schema: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("model file '" + path + "' has invalid params: " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("model file '" + path + "': " + e.what());
    }
}

}  // namespace iqa
