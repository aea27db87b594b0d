#include "iqa/distortion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iqa {

namespace {

double clamp255(double v) { return v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v); }

ImageGray add_noise(const ImageGray& img, double sigma, std::uint64_t seed) {
    if (sigma == 0.0) return img;
    ImageGray out = img;
    NormalSampler normal(seed);
    for (double& v : out.data()) {
        v = clamp255(v + sigma * normal.next());
    }
    return out;
}

ImageGray blur(const ImageGray& img, double sigma) {
    if (sigma == 0.0) return img;
    const int size = 2 * static_cast<int>(std::ceil(3.0 * sigma)) + 1;
    return convolve_same(img, gaussian_kernel(size, sigma));
}

ImageGray quantize(const ImageGray& img, int levels) {
    const double steps = levels - 1;
    ImageGray out = img;
    for (double& v : out.data()) {
        v = clamp255(std::nearbyint(std::nearbyint(v * steps / 255.0) * 255.0 / steps));
    }
    return out;
}

}  // namespace

void DistortionSpec::validate() const {
    switch (kind) {
        case Kind::gaussian_noise:
        case Kind::gaussian_blur:
            if (!(strength >= 0.0) || !std::isfinite(strength)) {
                throw std::invalid_argument("distortion sigma must be finite and >= 0, got " +
                                            std::to_string(strength));
            }
            break;
        case Kind::quantize: {
            const double levels = strength;
            if (!(levels >= 2.0 && levels <= 256.0) || levels != std::floor(levels)) {
                throw std::invalid_argument(
                    "quantize level count must be an integer in [2,256], got " +
                    std::to_string(strength));
            }
            break;
        }
    }
}

ImageGray apply_distortion(const ImageGray& img, const DistortionSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case DistortionSpec::Kind::gaussian_noise:
            return add_noise(img, spec.strength, spec.seed);
        case DistortionSpec::Kind::gaussian_blur:
            return blur(img, spec.strength);
        case DistortionSpec::Kind::quantize:
            return quantize(img, static_cast<int>(spec.strength));
    }
    throw std::logic_error("unreachable distortion kind");
}

}  // namespace iqa
