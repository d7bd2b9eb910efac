/**
 * image_io.cpp - PGM and PNG codecs for GrayImage
 */

#include "hdru/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

namespace hdru {

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

// Header tokenizer for netpbm: whitespace separated, '#' starts a comment.
class PnmHeader {
public:
    PnmHeader(const std::vector<unsigned char>& bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

    unsigned long next_uint(const std::string& what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw IoError("PGM: malformed " + what);
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > 1u << 30) throw IoError("PGM: " + what + " out of range");
        }
        return v;
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw IoError("PGM: missing raster separator");
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_;
};

GrayImage decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
    PnmHeader header(bytes, 2);
    const auto width = header.next_uint("width");
    const auto height = header.next_uint("height");
    const auto maxval = header.next_uint("maxval");
    if (maxval == 0 || maxval > 65535) throw IoError("PGM: unsupported maxval in '" + name + "'");
    const std::size_t start = header.raster_start();
    const std::size_t bps = maxval > 255 ? 2 : 1;
    const std::size_t count = width * height;
    if (bytes.size() < start + count * bps) throw IoError("PGM: truncated raster in '" + name + "'");

    std::vector<float> data(count);
    const float scale = 1.0f / static_cast<float>(maxval);
    for (std::size_t i = 0; i < count; ++i) {
        unsigned v = bps == 1 ? bytes[start + i]
                              : (static_cast<unsigned>(bytes[start + 2 * i]) << 8) | bytes[start + 2 * i + 1];
        data[i] = std::min(static_cast<float>(v) * scale, 1.0f);
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

struct PngReadSource {
    const std::vector<unsigned char>* bytes;
    std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t len) {
    auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
    if (src->offset + len > src->bytes->size()) png_error(png, "truncated PNG stream");
    std::copy_n(src->bytes->data() + src->offset, len, out);
    src->offset += len;
}

[[noreturn]] void png_throw_error(png_structp, png_const_charp msg) { throw IoError(std::string("PNG: ") + msg); }
void png_ignore_warning(png_structp, png_const_charp) {}

GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw_error, png_ignore_warning);
    if (!png) throw IoError("PNG: cannot allocate reader");
    png_infop info = png_create_info_struct(png);
    std::unique_ptr<png_structp, void (*)(png_structp*)> guard_png(&png, [](png_structp* p) {
        png_destroy_read_struct(p, nullptr, nullptr);
    });
    if (!info) throw IoError("PNG: cannot allocate info");
    struct InfoGuard {
        png_structp png;
        png_infop info;
        ~InfoGuard() { png_destroy_info_struct(png, &info); }
    } guard_info{png, info};

    PngReadSource src{&bytes, 0};
    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) throw IoError("PNG: '" + name + "' is not single-channel grayscale");
    if (depth != 8 && depth != 16) throw IoError("PNG: unsupported bit depth " + std::to_string(depth));

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> raster(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = raster.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    std::vector<float> data(static_cast<std::size_t>(width) * height);
    const float scale = depth == 8 ? 1.0f / 255.0f : 1.0f / 65535.0f;
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) {
            unsigned v = depth == 8 ? rows[y][x] : (static_cast<unsigned>(rows[y][2 * x]) << 8) | rows[y][2 * x + 1];
            data[static_cast<std::size_t>(y) * width + x] = static_cast<float>(v) * scale;
        }
    }
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

bool has_png_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

std::vector<unsigned char> encode_png(const GrayImage& img, BitDepth depth) {
    std::vector<unsigned char> encoded;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw_error, png_ignore_warning);
    if (!png) throw IoError("PNG: cannot allocate writer");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp png;
        png_infop info;
        ~Guard() { png_destroy_write_struct(&png, &info); }
    } guard{png, info};
    if (!info) throw IoError("PNG: cannot allocate info");

    const int bits = static_cast<int>(depth);
    png_set_write_fn(png, &encoded, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), bits,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const std::size_t bps = depth == BitDepth::u8 ? 1 : 2;
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * bps);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const unsigned q = quantize(img.at(x, y), depth);
            if (bps == 1) {
                row[x] = static_cast<unsigned char>(q);
            } else {
                row[2 * x] = static_cast<unsigned char>(q >> 8);
                row[2 * x + 1] = static_cast<unsigned char>(q & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    return encoded;
}

std::vector<unsigned char> encode_pgm(const GrayImage& img, BitDepth depth) {
    const unsigned maxval = depth == BitDepth::u8 ? 255 : 65535;
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    bytes.reserve(header.size() + img.size() * (depth == BitDepth::u8 ? 1 : 2));
    for (float v : img.pixels()) {
        const unsigned q = quantize(v, depth);
        if (depth == BitDepth::u8) {
            bytes.push_back(static_cast<unsigned char>(q));
        } else {
            bytes.push_back(static_cast<unsigned char>(q >> 8));
            bytes.push_back(static_cast<unsigned char>(q & 0xff));
        }
    }
    return bytes;
}

}  // namespace

unsigned quantize(float v, BitDepth depth) {
    const float maxval = depth == BitDepth::u8 ? 255.0f : 65535.0f;
    const float c = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
    return static_cast<unsigned>(std::lround(c * maxval));
}

GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    const std::string name = path.string();
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes, name);
    if (bytes.size() >= 2 && bytes[0] == 'P') {
        if (bytes[1] == '5') return decode_pgm(bytes, name);
        if (bytes[1] == '6' || bytes[1] == '3') throw IoError("'" + name + "' is a color PPM; grayscale required");
        throw IoError("'" + name + "': only binary (P5) PGM is supported");
    }
    throw IoError("'" + name + "': unrecognized image format");
}

void save_image(const GrayImage& img, const std::filesystem::path& path, BitDepth depth) {
    if (img.empty()) throw std::invalid_argument("save_image: empty image");
    write_bytes(path, has_png_extension(path) ? encode_png(img, depth) : encode_pgm(img, depth));
}

}  // namespace hdru
