#include "iqa/fr_metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iqa {

namespace {

struct Moments {
    double mu_x, mu_y, var_x, var_y, cov;
};

// Whole-image moments, population form (divide by n).
Moments global_moments(const ImageGray& x, const ImageGray& y) {
    const std::size_t n = x.pixel_count();
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x.data()[i];
        sy += y.data()[i];
    }
    const double mu_x = sx / static_cast<double>(n);
    const double mu_y = sy / static_cast<double>(n);
    double vx = 0.0, vy = 0.0, cxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x.data()[i] - mu_x;
        const double dy = y.data()[i] - mu_y;
        vx += dx * dx;
        vy += dy * dy;
        cxy += dx * dy;
    }
    return {mu_x, mu_y, vx / static_cast<double>(n), vy / static_cast<double>(n),
            cxy / static_cast<double>(n)};
}

double luminance_term(double mu_x, double mu_y, double c1) {
    return (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1);
}

// Combined contrast*structure term; with C3 = C2/2 this equals c(x,y)*s(x,y)
// algebraically and keeps ssim(x,x) an exact 1 (no sqrt involved).
double cs_term(double var_x, double var_y, double cov, double c2) {
    return (2.0 * cov + c2) / (var_x + var_y + c2);
}

double contrast_term(double sd_x, double sd_y, double c2) {
    return (2.0 * sd_x * sd_y + c2) / (sd_x * sd_x + sd_y * sd_y + c2);
}

double structure_term(double sd_x, double sd_y, double cov, double c3) {
    return (cov + c3) / (sd_x * sd_y + c3);
}

SsimResult ssim_global(const ImageGray& x, const ImageGray& y, const SsimParams& p) {
    const Moments m = global_moments(x, y);
    const double sd_x = std::sqrt(std::max(0.0, m.var_x));
    const double sd_y = std::sqrt(std::max(0.0, m.var_y));
    SsimResult r;
    r.luminance = luminance_term(m.mu_x, m.mu_y, p.c1());
    r.contrast = contrast_term(sd_x, sd_y, p.c2());
    r.structure = structure_term(sd_x, sd_y, m.cov, p.c3());
    r.ssim = r.luminance * cs_term(m.var_x, m.var_y, m.cov, p.c2());
    return r;
}

SsimResult ssim_windowed(const ImageGray& x, const ImageGray& y, const SsimParams& p) {
    const Kernel w = gaussian_kernel(p.window_size, p.window_sigma);

    ImageGray x2(x.width(), x.height());
    ImageGray y2(x.width(), x.height());
    ImageGray xy(x.width(), x.height());
    for (std::size_t i = 0; i < x.pixel_count(); ++i) {
        x2.data()[i] = x.data()[i] * x.data()[i];
        y2.data()[i] = y.data()[i] * y.data()[i];
        xy.data()[i] = x.data()[i] * y.data()[i];
    }
    const ImageGray mu_x = convolve_same(x, w);
    const ImageGray mu_y = convolve_same(y, w);
    const ImageGray ex2 = convolve_same(x2, w);
    const ImageGray ey2 = convolve_same(y2, w);
    const ImageGray exy = convolve_same(xy, w);

    double sum_ssim = 0.0, sum_l = 0.0, sum_c = 0.0, sum_s = 0.0;
    const std::size_t n = x.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double mx = mu_x.data()[i];
        const double my = mu_y.data()[i];
        const double var_x = ex2.data()[i] - mx * mx;
        const double var_y = ey2.data()[i] - my * my;
        const double cov = exy.data()[i] - mx * my;
        const double sd_x = std::sqrt(std::max(0.0, var_x));
        const double sd_y = std::sqrt(std::max(0.0, var_y));

        const double l = luminance_term(mx, my, p.c1());
        sum_l += l;
        sum_c += contrast_term(sd_x, sd_y, p.c2());
        sum_s += structure_term(sd_x, sd_y, cov, p.c3());
        sum_ssim += l * cs_term(var_x, var_y, cov, p.c2());
    }
    SsimResult r;
    r.ssim = sum_ssim / static_cast<double>(n);
    r.luminance = sum_l / static_cast<double>(n);
    r.contrast = sum_c / static_cast<double>(n);
    r.structure = sum_s / static_cast<double>(n);
    return r;
}

}  // namespace

double mse(const ImageGray& r, const ImageGray& f) {
    validate_pair(r, f);
    double acc = 0.0;
    const std::size_t n = r.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = r.data()[i] - f.data()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

PsnrValue psnr(const ImageGray& r, const ImageGray& f, double max_p) {
    if (!(max_p > 0.0)) {
        throw std::invalid_argument("psnr max_p must be positive, got " + std::to_string(max_p));
    }
    const double e = mse(r, f);
    if (e == 0.0) return {.identical = true};
    return {.identical = false, .db = 20.0 * std::log10(max_p) - 10.0 * std::log10(e)};
}

void SsimParams::validate() const {
    if (!(dynamic_range > 0.0)) throw std::invalid_argument("ssim dynamic range must be positive");
    if (!(k1 > 0.0 && k1 < 1.0)) throw std::invalid_argument("ssim k1 must lie in (0,1)");
    if (!(k2 > 0.0 && k2 < 1.0)) throw std::invalid_argument("ssim k2 must lie in (0,1)");
    if (mode == Mode::windowed) {
        if (window_size < 1 || window_size % 2 == 0) {
            throw std::invalid_argument("ssim window size must be odd and positive");
        }
        if (!(window_sigma > 0.0)) throw std::invalid_argument("ssim window sigma must be positive");
    }
}

SsimResult ssim(const ImageGray& x, const ImageGray& y, const SsimParams& p) {
    p.validate();
    validate_pair(x, y);
    return p.mode == SsimParams::Mode::global ? ssim_global(x, y, p) : ssim_windowed(x, y, p);
}

}  // namespace iqa
