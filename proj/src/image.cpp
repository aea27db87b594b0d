#include "iqa/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace iqa {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("image dimensions must be at least 1x1, got " +
                                    std::to_string(width) + "x" + std::to_string(height));
    }
}

int reflect_index(int i, int n) {
    // Symmetric extension: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

}  // namespace

ImageGray::ImageGray(int width, int height, double fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    if (!std::isfinite(fill)) throw std::invalid_argument("image fill value must be finite");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImageGray::ImageGray(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("image data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw std::invalid_argument("image contains a non-finite value");
    }
}

double ImageGray::at_reflect(int row, int col) const {
    return (*this)(reflect_index(row, height_), reflect_index(col, width_));
}

double to_grayscale(double r, double g, double b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

Kernel gaussian_kernel(int size, double sigma) {
    if (size < 1 || size % 2 == 0) {
        throw std::invalid_argument("kernel size must be odd and positive, got " +
                                    std::to_string(size));
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("kernel sigma must be positive, got " +
                                    std::to_string(sigma));
    }
    Kernel k;
    k.size = size;
    k.weights.resize(static_cast<std::size_t>(size) * size);
    const int half = size / 2;
    double sum = 0.0;
    for (int u = -half; u <= half; ++u) {
        for (int v = -half; v <= half; ++v) {
            const double w = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
            k.weights[static_cast<std::size_t>(u + half) * size + (v + half)] = w;
            sum += w;
        }
    }
    for (double& w : k.weights) w /= sum;
    return k;
}

ImageGray convolve_same(const ImageGray& img, const Kernel& k) {
    if (k.size > img.width() || k.size > img.height()) {
        throw std::invalid_argument("kernel size " + std::to_string(k.size) +
                                    " exceeds image dimensions " + std::to_string(img.width()) +
                                    "x" + std::to_string(img.height()));
    }
    const int half = k.size / 2;
    ImageGray out(img.width(), img.height());
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            double acc = 0.0;
            for (int u = -half; u <= half; ++u) {
                for (int v = -half; v <= half; ++v) {
                    acc += k.at(u + half, v + half) * img.at_reflect(r + u, c + v);
                }
            }
            out(r, c) = acc;
        }
    }
    return out;
}

ImageGray downsample2x(const ImageGray& img) {
    if (img.width() < 2 || img.height() < 2) {
        throw std::invalid_argument("downsample2x needs at least a 2x2 image, got " +
                                    std::to_string(img.width()) + "x" +
                                    std::to_string(img.height()));
    }
    const int ow = img.width() / 2;
    const int oh = img.height() / 2;
    ImageGray out(ow, oh);
    for (int r = 0; r < oh; ++r) {
        for (int c = 0; c < ow; ++c) {
            // Pairwise grouping keeps the mean of four equal values exact.
            const double top = img(2 * r, 2 * c) + img(2 * r, 2 * c + 1);
            const double bot = img(2 * r + 1, 2 * c) + img(2 * r + 1, 2 * c + 1);
            out(r, c) = (top + bot) * 0.25;
        }
    }
    return out;
}

void validate_pair(const ImageGray& a, const ImageGray& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("image dimensions differ: " + std::to_string(a.width()) +
                                    "x" + std::to_string(a.height()) + " vs " +
                                    std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()));
    }
}

}  // namespace iqa
