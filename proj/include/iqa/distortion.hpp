#pragma once

#include <cstdint>
#include <random>

#include "iqa/image.hpp"

namespace iqa {

/// Standard-normal variates from mt19937_64 (output sequence fixed by the
/// C++ standard) through an explicit Box-Muller transform, so a seed
/// reproduces the same stream on every platform.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0,1], keeps log() finite
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    double uniform01() {
        // Top 53 bits -> [0,1).
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct DistortionSpec {
    enum class Kind { gaussian_noise, gaussian_blur, quantize };

    Kind kind = Kind::gaussian_noise;
    double strength = 0.0;       // noise sigma | blur sigma | level count
    std::uint64_t seed = 0;      // noise only

    void validate() const;
};

/// Applies the distortion deterministically; repeated calls with the same
/// image and spec are bit-identical. Outputs stay within [0,255].
ImageGray apply_distortion(const ImageGray& img, const DistortionSpec& spec);

}  // namespace iqa
