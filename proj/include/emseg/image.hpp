#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace emseg {

// 8-bit RGB image, row-major, three bytes per pixel
struct RgbImage {
    std::size_t height = 0, width = 0;
    std::vector<std::uint8_t> data;  // height * width * 3

    RgbImage() = default;
    RgbImage(std::size_t h, std::size_t w) : height(h), width(w), data(h * w * 3, 0) {}

    std::uint8_t& at(std::size_t y, std::size_t x, std::size_t ch) {
        return data[(y * width + x) * 3 + ch];
    }
    std::uint8_t at(std::size_t y, std::size_t x, std::size_t ch) const {
        return data[(y * width + x) * 3 + ch];
    }
};

// integer label per pixel
struct LabelMap {
    std::size_t height = 0, width = 0;
    std::vector<std::int32_t> labels;

    LabelMap() = default;
    LabelMap(std::size_t h, std::size_t w) : height(h), width(w), labels(h * w, 0) {}

    std::int32_t at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }
    std::int32_t& at(std::size_t y, std::size_t x) { return labels[y * width + x]; }

    // highest label + 1 (labels produced by this library are contiguous)
    std::size_t label_count() const;
};

// dispatches on the file extension: .ppm -> netpbm P6, .png -> libpng
RgbImage load_image(const std::string& path);
void save_image(const RgbImage& img, const std::string& path);

RgbImage load_ppm(const std::string& path);
void save_ppm(const RgbImage& img, const std::string& path);
RgbImage load_png(const std::string& path);
void save_png(const RgbImage& img, const std::string& path);

// ASCII PGM (P2) with maxval = label_count - 1 (0 for a single-label map,
// which our reader accepts back)
void save_label_pgm(const LabelMap& map, const std::string& path);
// reads P2 (ASCII) or P5 (binary) grayscale maps
LabelMap load_label_pgm(const std::string& path);

// copies the image and paints every pixel whose 4-neighborhood crosses a
// label boundary in fixed red (255, 0, 0)
RgbImage boundary_overlay(const RgbImage& img, const LabelMap& labels);

}  // namespace emseg
