#pragma once

#include "iqa/image.hpp"

namespace iqa {

/// Mean squared error, normalized by pixel count.
double mse(const ImageGray& r, const ImageGray& f);

/// PSNR outcome. Identical images (zero MSE) have no finite dB value and are
/// flagged instead of being mapped to a sentinel number.
struct PsnrValue {
    bool identical = false;
    double db = 0.0;  // meaningful only when !identical
};

PsnrValue psnr(const ImageGray& r, const ImageGray& f, double max_p = 255.0);

struct SsimParams {
    enum class Mode { global, windowed };

    double dynamic_range = 255.0;  // L
    double k1 = 0.01;
    double k2 = 0.03;
    Mode mode = Mode::global;
    int window_size = 11;      // windowed mode only
    double window_sigma = 1.5;

    double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
    double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
    double c3() const { return c2() / 2.0; }

    void validate() const;

    bool operator==(const SsimParams&) const = default;
};

/// SSIM with its luminance/contrast/structure factors. In global mode the
/// factors multiply to the ssim value; in windowed mode each field is the
/// mean of the corresponding per-pixel map.
struct SsimResult {
    double ssim = 0.0;
    double luminance = 0.0;
    double contrast = 0.0;
    double structure = 0.0;
};

SsimResult ssim(const ImageGray& x, const ImageGray& y, const SsimParams& p = {});

}  // namespace iqa
