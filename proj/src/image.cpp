#include "emseg/image.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "emseg/error.hpp"

namespace emseg {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw Error("short write to " + path);
}

void skip_space_and_comments(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
            ++pos;
        } else if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
}

std::size_t parse_header_uint(const std::string& buf, std::size_t& pos, const char* what) {
    skip_space_and_comments(buf, pos);
    if (pos >= buf.size() || !std::isdigit(static_cast<unsigned char>(buf[pos]))) {
        throw ParseError(std::string("expected integer for ") + what, pos);
    }
    std::size_t v = 0;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
        v = v * 10 + std::size_t(buf[pos] - '0');
        if (v > 1000000000) throw ParseError(std::string(what) + " out of range", pos);
        ++pos;
    }
    return v;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::size_t LabelMap::label_count() const {
    std::int32_t max_label = -1;
    for (std::int32_t v : labels)
        if (v > max_label) max_label = v;
    return std::size_t(max_label + 1);
}

RgbImage load_image(const std::string& path) {
    if (has_suffix(path, ".ppm")) return load_ppm(path);
    if (has_suffix(path, ".png")) return load_png(path);
    throw ConfigError("unsupported image extension: " + path + " (use .ppm or .png)");
}

void save_image(const RgbImage& img, const std::string& path) {
    if (has_suffix(path, ".ppm")) return save_ppm(img, path);
    if (has_suffix(path, ".png")) return save_png(img, path);
    throw ConfigError("unsupported image extension: " + path + " (use .ppm or .png)");
}

RgbImage load_ppm(const std::string& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '6') {
        throw ParseError(path + ": not a P6 ppm", 0);
    }
    std::size_t pos = 2;
    const std::size_t w = parse_header_uint(buf, pos, "width");
    const std::size_t h = parse_header_uint(buf, pos, "height");
    const std::size_t maxval_pos = pos;
    const std::size_t maxval = parse_header_uint(buf, pos, "maxval");
    if (w == 0 || h == 0) throw ParseError(path + ": zero image dimension", 2);
    if (maxval != 255) throw ParseError(path + ": maxval must be 255", maxval_pos);
    if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos]))) {
        throw ParseError(path + ": missing whitespace before pixel payload", pos);
    }
    ++pos;
    const std::size_t needed = h * w * 3;
    if (buf.size() - pos < needed) {
        throw ParseError(path + ": truncated pixel payload", buf.size());
    }
    RgbImage img(h, w);
    for (std::size_t b = 0; b < needed; ++b) img.data[b] = std::uint8_t(buf[pos + b]);
    return img;
}

void save_ppm(const RgbImage& img, const std::string& path) {
    if (img.height == 0 || img.width == 0) throw ShapeError("save_ppm: empty image");
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
    write_file(path, out);
}

RgbImage load_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw ParseError(path + ": " + image.message, 0);
    }
    image.format = PNG_FORMAT_RGB;
    RgbImage img(image.height, image.width);
    if (!png_image_finish_read(&image, nullptr, img.data.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw ParseError(path + ": " + msg, 0);
    }
    return img;
}

void save_png(const RgbImage& img, const std::string& path) {
    if (img.height == 0 || img.width == 0) throw ShapeError("save_png: empty image");
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = png_uint_32(img.width);
    image.height = png_uint_32(img.height);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw Error(path + ": " + msg);
    }
}

void save_label_pgm(const LabelMap& map, const std::string& path) {
    if (map.height == 0 || map.width == 0) throw ShapeError("save_label_pgm: empty map");
    std::int32_t max_label = 0;
    for (std::int32_t v : map.labels) {
        if (v < 0) throw RangeError("save_label_pgm: negative label");
        if (v > max_label) max_label = v;
    }
    if (max_label > 65535) throw RangeError("save_label_pgm: label exceeds 65535");
    std::string out = "P2\n" + std::to_string(map.width) + " " + std::to_string(map.height) +
                      "\n" + std::to_string(max_label) + "\n";
    for (std::size_t y = 0; y < map.height; ++y) {
        for (std::size_t x = 0; x < map.width; ++x) {
            if (x) out += ' ';
            out += std::to_string(map.at(y, x));
        }
        out += '\n';
    }
    write_file(path, out);
}

LabelMap load_label_pgm(const std::string& path) {
    const std::string buf = read_file(path);
    if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '2' && buf[1] != '5')) {
        throw ParseError(path + ": not a P2/P5 pgm", 0);
    }
    const bool binary = buf[1] == '5';
    std::size_t pos = 2;
    const std::size_t w = parse_header_uint(buf, pos, "width");
    const std::size_t h = parse_header_uint(buf, pos, "height");
    const std::size_t maxval = parse_header_uint(buf, pos, "maxval");
    if (w == 0 || h == 0) throw ParseError(path + ": zero image dimension", 2);
    if (maxval > 65535) throw ParseError(path + ": maxval exceeds 65535", pos);
    LabelMap map(h, w);
    if (binary) {
        if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos]))) {
            throw ParseError(path + ": missing whitespace before pixel payload", pos);
        }
        ++pos;
        const std::size_t bytes_per = maxval < 256 ? 1 : 2;
        const std::size_t needed = h * w * bytes_per;
        if (buf.size() - pos < needed) {
            throw ParseError(path + ": truncated pixel payload", buf.size());
        }
        for (std::size_t idx = 0; idx < h * w; ++idx) {
            std::size_t v;
            if (bytes_per == 1) {
                v = std::uint8_t(buf[pos + idx]);
            } else {
                v = std::size_t(std::uint8_t(buf[pos + 2 * idx])) << 8 |
                    std::uint8_t(buf[pos + 2 * idx + 1]);
            }
            map.labels[idx] = std::int32_t(v);
        }
    } else {
        for (std::size_t idx = 0; idx < h * w; ++idx) {
            const std::size_t at = pos;
            const std::size_t v = parse_header_uint(buf, pos, "sample");
            if (v > maxval && maxval > 0) {
                throw ParseError(path + ": sample exceeds maxval", at);
            }
            map.labels[idx] = std::int32_t(v);
        }
    }
    return map;
}

RgbImage boundary_overlay(const RgbImage& img, const LabelMap& labels) {
    if (img.height != labels.height || img.width != labels.width) {
        throw ShapeError("boundary_overlay: image and label map sizes differ");
    }
    RgbImage out = img;
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            const std::int32_t v = labels.at(y, x);
            const bool edge = (y > 0 && labels.at(y - 1, x) != v) ||
                              (y + 1 < img.height && labels.at(y + 1, x) != v) ||
                              (x > 0 && labels.at(y, x - 1) != v) ||
                              (x + 1 < img.width && labels.at(y, x + 1) != v);
            if (edge) {
                out.at(y, x, 0) = 255;
                out.at(y, x, 1) = 0;
                out.at(y, x, 2) = 0;
            }
        }
    }
    return out;
}

}  // namespace emseg
