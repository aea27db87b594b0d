#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "iqa/fr_metrics.hpp"
#include "oracle.hpp"

using namespace iqa;

namespace {

ImageGray integer_image(int w, int h, std::uint64_t seed, int lo, int hi) {
    std::mt19937_64 rng(seed);
    ImageGray img(w, h);
    for (double& v : img.data()) {
        v = static_cast<double>(lo + static_cast<int>(rng() % (hi - lo + 1)));
    }
    return img;
}

}  // namespace

TEST_CASE("mse hand-worked values") {
    const ImageGray a = oracle::random_image(16, 16, 1);
    CHECK(mse(a, a) == 0.0);

    const ImageGray zeros(2, 2, 0.0);
    const ImageGray ones(2, 2, 1.0);
    CHECK(mse(zeros, ones) == 1.0);

    const ImageGray ramp(2, 2, std::vector<double>{1, 2, 3, 4});
    CHECK(mse(zeros, ramp) == doctest::Approx(7.5).epsilon(1e-15));

    CHECK_THROWS_AS(mse(ImageGray(2, 2), ImageGray(2, 3)), std::invalid_argument);
}

TEST_CASE("mse symmetry and shift invariance") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const ImageGray a = integer_image(17, 13, seed, 0, 200);
        const ImageGray b = integer_image(17, 13, seed + 100, 0, 200);
        CHECK(mse(a, b) == mse(b, a));

        ImageGray a2 = a;
        ImageGray b2 = b;
        for (double& v : a2.data()) v += 30.0;
        for (double& v : b2.data()) v += 30.0;
        CHECK(mse(a2, b2) == mse(a, b));  // integer-valued, exact
    }
}

TEST_CASE("psnr anchors and identical flag") {
    const ImageGray a = oracle::random_image(8, 8, 2);
    CHECK(psnr(a, a).identical);

    const ImageGray zeros(4, 4, 0.0);
    const ImageGray ones(4, 4, 1.0);
    const PsnrValue unit = psnr(zeros, ones);
    CHECK_FALSE(unit.identical);
    CHECK(unit.db == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-12));

    const ImageGray full(4, 4, 255.0);
    const PsnrValue zero_db = psnr(zeros, full);
    CHECK(std::abs(zero_db.db) < 1e-12);

    CHECK_THROWS_AS(psnr(zeros, ones, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(psnr(ImageGray(2, 2), ImageGray(3, 2)), std::invalid_argument);
}

TEST_CASE("psnr strictly decreases as mse increases") {
    const ImageGray base = oracle::random_image(16, 16, 3, 40.0, 215.0);
    double prev_db = 1e300;
    for (double offset : {1.0, 2.0, 5.0, 11.0, 23.0}) {
        ImageGray shifted = base;
        for (double& v : shifted.data()) v += offset;
        const PsnrValue p = psnr(base, shifted);
        CHECK(p.db < prev_db);
        prev_db = p.db;
    }
}

TEST_CASE("ssim of an image with itself is exactly 1 in both modes") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const ImageGray x = oracle::random_image(20, 15, seed);
        SsimParams global;
        CHECK(ssim(x, x, global).ssim == 1.0);
        SsimParams windowed;
        windowed.mode = SsimParams::Mode::windowed;
        CHECK(ssim(x, x, windowed).ssim == 1.0);
    }
}

TEST_CASE("ssim symmetry in both modes") {
    SsimParams windowed;
    windowed.mode = SsimParams::Mode::windowed;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const ImageGray x = oracle::random_image(16, 16, seed);
        const ImageGray y = oracle::random_image(16, 16, seed + 50);
        CHECK(std::abs(ssim(x, y).ssim - ssim(y, x).ssim) <= 1e-12);
        CHECK(std::abs(ssim(x, y, windowed).ssim - ssim(y, x, windowed).ssim) <= 1e-12);
    }
}

TEST_CASE("ssim constant-image degenerate case") {
    const ImageGray black(8, 8, 0.0);
    const ImageGray white(8, 8, 255.0);
    const SsimResult r = ssim(black, white);
    const double c1 = 6.5025;  // (0.01*255)^2
    CHECK(r.contrast == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.structure == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.luminance == doctest::Approx(c1 / (255.0 * 255.0 + c1)).epsilon(1e-12));
    CHECK(r.ssim == doctest::Approx(9.999e-5).epsilon(1e-4));
}

TEST_CASE("global ssim equals l*c*s and components stay in range") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ImageGray x = oracle::random_image(24, 24, seed);
        // Include anti-correlated pairs so the structure term goes negative.
        ImageGray y = oracle::random_image(24, 24, seed + 77);
        if (seed % 2 == 0) {
            for (std::size_t i = 0; i < y.pixel_count(); ++i) {
                y.data()[i] = 255.0 - x.data()[i];
            }
        }
        const SsimResult r = ssim(x, y);
        CHECK(std::abs(r.ssim - r.luminance * r.contrast * r.structure) <= 1e-12);
        CHECK(r.ssim >= -1.0);
        CHECK(r.ssim <= 1.0);
        CHECK(r.luminance > 0.0);
        CHECK(r.luminance <= 1.0);
        CHECK(r.contrast > 0.0);
        CHECK(r.contrast <= 1.0);
    }
}

TEST_CASE("windowed ssim matches the naive per-window oracle") {
    SsimParams p;
    p.mode = SsimParams::Mode::windowed;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ImageGray x = oracle::random_image(32, 32, seed);
        const ImageGray y = oracle::random_image(32, 32, seed + 1000);
        const double got = ssim(x, y, p).ssim;
        const double expected = oracle::ssim_windowed(x, y, p);
        CHECK(got == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("ssim parameter validation") {
    const ImageGray x(8, 8, 1.0);
    SsimParams p;
    p.k1 = 0.0;
    CHECK_THROWS_AS(ssim(x, x, p), std::invalid_argument);
    p = {};
    p.k2 = 1.5;
    CHECK_THROWS_AS(ssim(x, x, p), std::invalid_argument);
    p = {};
    p.dynamic_range = -5.0;
    CHECK_THROWS_AS(ssim(x, x, p), std::invalid_argument);
    p = {};
    p.mode = SsimParams::Mode::windowed;
    p.window_size = 10;
    CHECK_THROWS_AS(ssim(x, x, p), std::invalid_argument);
    p.window_size = 11;  // larger than the 8x8 image
    CHECK_THROWS_AS(ssim(x, x, p), std::invalid_argument);
}
