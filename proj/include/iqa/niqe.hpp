#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iqa/image.hpp"

namespace iqa {

/// Thrown by the GGD/AGGD fitters when the sample set carries no usable
/// shape information (all values identical).
class degenerate_samples_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mean-subtracted contrast-normalized coefficients plus the local deviation
/// field they were normalized by. Same dimensions as the source image.
struct MscnField {
    ImageGray coefficients;
    ImageGray local_sigma;
};

/// Computes MSCN coefficients: local Gaussian-weighted mean mu and deviation
/// sigma (window_size x window_size, symmetric borders), then
/// (I - mu) / (sigma + stabilizer).
MscnField mscn(const ImageGray& img, int window_size = 7, double window_sigma = 7.0 / 6.0,
               double stabilizer = 1.0);

struct GgdFit {
    double shape = 0.0;     // alpha
    double variance = 0.0;  // mean of squares
};

struct AggdFit {
    double shape = 0.0;
    double mean = 0.0;
    double var_left = 0.0;
    double var_right = 0.0;
};

/// Moment-matching generalized-Gaussian fit; the shape comes from a
/// nearest-match lookup of the moment ratio on the alpha grid [0.2,10]
/// (step 0.001).
GgdFit fit_ggd(std::span<const double> samples);

/// Moment-matching asymmetric generalized-Gaussian fit on the same alpha grid.
AggdFit fit_aggd(std::span<const double> samples);

struct NiqeParams {
    int patch_size = 96;              // full-scale block edge; half at scale 2
    double sharpness_fraction = 0.75; // keep blocks sharper than fraction*max
    double stabilizer = 1.0;          // MSCN denominator offset C
    int window_size = 7;              // MSCN local-moment window
    double window_sigma = 7.0 / 6.0;
    int scales = 2;

    void validate() const;

    bool operator==(const NiqeParams&) const = default;
};

inline constexpr int kNiqeFeatureCount = 36;  // 18 per scale, 2 scales

using FeatureVector = std::array<double, kNiqeFeatureCount>;

struct BlockFeatures {
    FeatureVector features{};
    double sharpness = 0.0;  // mean local_sigma over the block at scale 1
};

/// Partitions the image into non-overlapping patch_size x patch_size blocks
/// and emits per-block NSS features: GGD(shape, variance) of the block's MSCN
/// coefficients plus AGGD(shape, mean, var_left, var_right) for the H/V/D1/D2
/// neighbor products, at full scale and on the 2x downsampled image. A block
/// whose samples are all equal contributes the documented fallback
/// (shape = 10, variances = 0) instead of aborting the image.
std::vector<BlockFeatures> extract_features(const ImageGray& img, const NiqeParams& params = {});

/// Keeps blocks with sharpness > fraction * max; never returns fewer than one
/// block (the sharpest survives).
std::vector<FeatureVector> select_sharp(const std::vector<BlockFeatures>& blocks,
                                        double fraction);

/// Pristine multivariate Gaussian model over the 36-dim feature space.
struct NiqeModel {
    FeatureVector mean{};
    std::vector<double> covariance;  // 36x36, row-major, symmetric
    NiqeParams params;

    double cov(int i, int j) const { return covariance[static_cast<std::size_t>(i) * kNiqeFeatureCount + j]; }
};

/// Mean + sample covariance (n-1) of the given feature vectors, with the
/// trace-scaled ridge applied when the smallest eigenvalue calls for it.
NiqeModel fit_model_from_features(const std::vector<FeatureVector>& vectors,
                                  const NiqeParams& params);

/// Extracts and sharpness-selects features from every corpus image, then fits
/// the pristine model over the pooled vectors.
NiqeModel train_model(std::span<const ImageGray> corpus, const NiqeParams& params = {});

enum class NiqeMetric {
    paper_eq7,  // per-block squared distance standardized by diag(cov), averaged
    canonical,  // sqrt((mu-nu)^T ((cov+cov_test)/2)^-1 (mu-nu))
};

/// Scores pre-extracted feature vectors against the model.
double score_features(const std::vector<FeatureVector>& features, const NiqeModel& model,
                      NiqeMetric metric);

/// Full pipeline: extract blocks with the model's params, select sharp blocks
/// with the model's fraction, score. Lower is closer to the pristine model.
double niqe_score(const ImageGray& img, const NiqeModel& model,
                  NiqeMetric metric = NiqeMetric::paper_eq7);

/// Model file I/O (JSON: version, params, mean[36], covariance[36][36]).
/// A version or params mismatch at load is an error.
void save_model(const NiqeModel& model, const std::string& path);
NiqeModel load_model(const std::string& path);

}  // namespace iqa
