#pragma once

#include <cstddef>
#include <vector>

#include "emseg/matrix.hpp"

namespace emseg {

// dense height x width x dim tensor, row-major; pixel (x, y) is row y*width + x
struct FeatureMap {
    std::size_t height = 0, width = 0, dim = 0;
    std::vector<double> data;  // height * width * dim values

    FeatureMap() = default;
    FeatureMap(std::size_t h, std::size_t w, std::size_t d, double fill = 0.0)
        : height(h), width(w), dim(d), data(h * w * d, fill) {}

    double& at(std::size_t y, std::size_t x, std::size_t c) {
        return data[(y * width + x) * dim + c];
    }
    double at(std::size_t y, std::size_t x, std::size_t c) const {
        return data[(y * width + x) * dim + c];
    }

    std::size_t pixels() const { return height * width; }

    // (H*W) x dim view in pixel order
    Matrix to_matrix() const;
    static FeatureMap from_matrix(std::size_t h, std::size_t w, const Matrix& m);
};

// Adds 2-D sinusoidal position channels on top of the input: the first dim/2
// channels encode x (column), the last dim/2 encode y (row), as sin/cos pairs
// on a geometric frequency ladder with base 10000. dim must be even.
FeatureMap position_embed(const FeatureMap& input);

struct PixelCoord {
    std::size_t y = 0, x = 0;
};

struct GridSampleResult {
    Matrix features;                 // k_actual x dim rows, grid order
    std::vector<PixelCoord> coords;  // strictly increasing linear pixel index
    std::size_t k_actual = 0;
};

// Samples a uniform grid of cell-center pixels, row-major: with
// f = sqrt(k_requested / (H*W)) the grid is floor(W*f) x floor(H*f) cells,
// each contributing the pixel at its center. Grid dims are clamped to at
// least 1 so degenerate aspect ratios still produce a seed.
// Requires 1 <= k_requested <= H*W.
GridSampleResult grid_sample(const FeatureMap& map, std::size_t k_requested);

}  // namespace emseg
