#include "iqa/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace iqa {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& cause) {
    throw std::runtime_error("cannot load '" + path + "': " + cause);
}

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "file is not readable");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.empty()) fail(path, "file is empty");
    return bytes;
}

struct PngReadState {
    const unsigned char* data;
    std::size_t size;
    std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + n > st->size) {
        png_error(png, "unexpected end of PNG stream");
    }
    std::memcpy(out, st->data + st->pos, n);
    st->pos += n;
}

ImageGray load_png_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    // All C++ objects live in this frame before setjmp; after a libpng
    // longjmp we land back here and throw normally. Everything read after a
    // jump is a volatile scalar.
    std::vector<unsigned char> pixels;
    std::vector<png_bytep> rows;
    PngReadState state{bytes.data(), bytes.size(), 0};

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "libpng initialization failed");
    }

    enum { kFailStream = 0, kFailBitDepth, kFailChannels };
    volatile int fail_kind = kFailStream;
    volatile int out_width = 0, out_height = 0, out_channels = 0;
    volatile bool ok = false;
    if (setjmp(png_jmpbuf(png)) == 0) {
        png_set_read_fn(png, &state, png_mem_read);
        png_read_info(png, info);

        const int bit_depth = png_get_bit_depth(png, info);
        const int color_type = png_get_color_type(png, info);
        if (bit_depth == 16) {
            fail_kind = kFailBitDepth;
            longjmp(png_jmpbuf(png), 1);
        }
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        png_set_strip_alpha(png);
        png_set_interlace_handling(png);
        png_read_update_info(png, info);

        const int height = static_cast<int>(png_get_image_height(png, info));
        const int channels = png_get_channels(png, info);
        out_width = static_cast<int>(png_get_image_width(png, info));
        out_height = height;
        out_channels = channels;
        if (channels != 1 && channels != 3) {
            fail_kind = kFailChannels;
            longjmp(png_jmpbuf(png), 1);
        }

        const std::size_t stride = png_get_rowbytes(png, info);
        pixels.resize(stride * height);
        rows.resize(height);
        for (int r = 0; r < height; ++r) rows[r] = pixels.data() + stride * r;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
        ok = true;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!ok) {
        switch (fail_kind) {
            case kFailBitDepth:
                fail(path, "unsupported bit depth 16 (only 8-bit channels are supported)");
            case kFailChannels:
                fail(path, "unsupported channel layout (" + std::to_string(out_channels) +
                               " channels)");
            default:
                fail(path, "invalid or truncated PNG stream");
        }
    }

    const int width = out_width;
    const int height = out_height;
    const int channels = out_channels;
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int r = 0; r < height; ++r) {
        const unsigned char* row = pixels.data() + stride * r;
        for (int c = 0; c < width; ++c) {
            if (channels == 1) {
                out[static_cast<std::size_t>(r) * width + c] = row[c];
            } else {
                out[static_cast<std::size_t>(r) * width + c] =
                    to_grayscale(row[3 * c], row[3 * c + 1], row[3 * c + 2]);
            }
        }
    }
    return ImageGray(width, height, std::move(out));
}

// Reads one whitespace-delimited header token, skipping '#' comments.
bool next_pnm_token(const std::vector<unsigned char>& bytes, std::size_t& pos,
                    std::string& token) {
    token.clear();
    while (pos < bytes.size()) {
        unsigned char ch = bytes[pos];
        if (ch == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(ch)) {
            ++pos;
        } else {
            break;
        }
    }
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
        token.push_back(static_cast<char>(bytes[pos]));
        ++pos;
    }
    return !token.empty();
}

long parse_pnm_int(const std::string& path, const std::vector<unsigned char>& bytes,
                   std::size_t& pos, const char* what) {
    std::string tok;
    if (!next_pnm_token(bytes, pos, tok)) fail(path, std::string("missing ") + what + " in PNM header");
    try {
        std::size_t used = 0;
        long v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail(path, std::string("malformed ") + what + " '" + tok + "' in PNM header");
    }
}

ImageGray load_pnm_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    const bool color = bytes[1] == '6';
    std::size_t pos = 2;
    const long width = parse_pnm_int(path, bytes, pos, "width");
    const long height = parse_pnm_int(path, bytes, pos, "height");
    const long maxval = parse_pnm_int(path, bytes, pos, "maxval");
    if (width < 1 || height < 1) fail(path, "invalid PNM dimensions");
    if (maxval != 255) {
        fail(path, "unsupported PNM maxval " + std::to_string(maxval) +
                       " (only 8-bit, maxval 255, is supported)");
    }
    if (pos >= bytes.size()) fail(path, "missing PNM pixel data");
    ++pos;  // single whitespace byte after maxval

    const std::size_t n = static_cast<std::size_t>(width) * height;
    const std::size_t need = n * (color ? 3 : 1);
    if (bytes.size() - pos < need) fail(path, "truncated PNM pixel data");

    std::vector<double> out(n);
    const unsigned char* p = bytes.data() + pos;
    for (std::size_t i = 0; i < n; ++i) {
        if (color) {
            out[i] = to_grayscale(p[3 * i], p[3 * i + 1], p[3 * i + 2]);
        } else {
            out[i] = p[i];
        }
    }
    return ImageGray(static_cast<int>(width), static_cast<int>(height), std::move(out));
}

unsigned char to_byte(double v) {
    const double r = std::nearbyint(v);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<unsigned char>(r);
}

}  // namespace

ImageGray load_image(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_sig, 8) == 0) {
        return load_png_bytes(path, bytes);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
        return load_pnm_bytes(path, bytes);
    }
    fail(path, "unrecognized format (expected PNG or binary PGM/PPM)");
}

void save_png(const ImageGray& img, const std::string& path) {
    std::vector<unsigned char> row_bytes(static_cast<std::size_t>(img.width()) * img.height());
    std::vector<png_bytep> rows(img.height());
    for (int r = 0; r < img.height(); ++r) {
        rows[r] = row_bytes.data() + static_cast<std::size_t>(r) * img.width();
        for (int c = 0; c < img.width(); ++c) rows[r][c] = to_byte(img(r, c));
    }

    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write '" + path + "': file is not writable");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("cannot write '" + path + "': libpng initialization failed");
    }
    volatile bool ok = false;
    if (setjmp(png_jmpbuf(png)) == 0) {
        png_init_io(png, fp);
        png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_GRAY,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
        ok = true;
    }
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    if (!ok) throw std::runtime_error("cannot write '" + path + "': PNG encoding failed");
}

void save_pgm(const ImageGray& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "': file is not writable");
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    for (int r = 0; r < img.height(); ++r) {
        for (int c = 0; c < img.width(); ++c) {
            out.put(static_cast<char>(to_byte(img(r, c))));
        }
    }
    if (!out) throw std::runtime_error("cannot write '" + path + "': write failed");
}

void save_image(const ImageGray& img, const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".png") {
        save_png(img, path);
    } else if (ext == ".pgm") {
        save_pgm(img, path);
    } else {
        throw std::runtime_error("cannot write '" + path +
                                 "': unsupported output extension (use .png or .pgm)");
    }
}

}  // namespace iqa
