#pragma once

#include <cstddef>
#include <vector>

namespace iqa {

/// Row-major grayscale image. Intensities are real-valued with a nominal
/// range of [0,255]; all pipeline math stays in double precision, integer
/// quantization happens only at file I/O boundaries.
class ImageGray {
public:
    ImageGray() = default;
    ImageGray(int width, int height, double fill = 0.0);
    ImageGray(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return data_.size(); }

    double operator()(int row, int col) const { return data_[idx(row, col)]; }
    double& operator()(int row, int col) { return data_[idx(row, col)]; }

    /// Border access with symmetric (mirror-with-edge-repeat) extension:
    /// index -1 maps to 0, -2 to 1, h maps to h-1.
    double at_reflect(int row, int col) const;

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool operator==(const ImageGray&) const = default;

private:
    std::size_t idx(int row, int col) const {
        return static_cast<std::size_t>(row) * width_ + col;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// ITU-R BT.601 luma. Inputs and output in [0,255]; not rounded.
double to_grayscale(double r, double g, double b);

/// Square convolution kernel with odd size; weights sum to 1.
struct Kernel {
    int size = 0;
    std::vector<double> weights;  // size*size, row-major

    double at(int u, int v) const {
        return weights[static_cast<std::size_t>(u) * size + v];
    }
};

/// Normalized Gaussian weights exp(-(u^2+v^2)/(2*sigma^2)) on the centered
/// size x size grid.
Kernel gaussian_kernel(int size, double sigma);

/// Windowed weighted sum (correlation) with symmetric border extension.
/// Output has the same dimensions as the input.
ImageGray convolve_same(const ImageGray& img, const Kernel& k);

/// Halves each dimension; every output pixel is the mean of its 2x2 source
/// block. A trailing odd row/column is dropped.
ImageGray downsample2x(const ImageGray& img);

/// Throws unless both images have identical dimensions.
void validate_pair(const ImageGray& a, const ImageGray& b);

}  // namespace iqa
