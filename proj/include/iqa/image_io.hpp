#pragma once

#include <string>

#include "iqa/image.hpp"

namespace iqa {

/// Loads a PNG (8-bit gray or RGB) or binary PGM/PPM (maxval 255) and
/// converts color inputs to grayscale via BT.601 luma. The format is
/// detected from the file's magic bytes, not the extension.
ImageGray load_image(const std::string& path);

/// Writes an 8-bit grayscale PNG; values are rounded and clamped to [0,255].
void save_png(const ImageGray& img, const std::string& path);

/// Writes a binary PGM (P5, maxval 255); values rounded and clamped.
void save_pgm(const ImageGray& img, const std::string& path);

/// Dispatches on the output extension: .png or .pgm.
void save_image(const ImageGray& img, const std::string& path);

}  // namespace iqa
