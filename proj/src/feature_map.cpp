#include "emseg/feature_map.hpp"

#include <cmath>
#include <string>

#include "emseg/error.hpp"

namespace emseg {

Matrix FeatureMap::to_matrix() const {
    Matrix m(pixels(), dim);
    m.data() = data;
    return m;
}

FeatureMap FeatureMap::from_matrix(std::size_t h, std::size_t w, const Matrix& m) {
    if (m.rows() != h * w) {
        throw ShapeError("from_matrix: " + std::to_string(m.rows()) + " rows cannot fill " +
                         std::to_string(h) + "x" + std::to_string(w) + " pixels");
    }
    FeatureMap fm(h, w, m.cols());
    fm.data = m.data();
    return fm;
}

FeatureMap position_embed(const FeatureMap& input) {
    if (input.dim == 0 || input.dim % 2 != 0) {
        throw ConfigError("position_embed requires an even channel count, got " +
                          std::to_string(input.dim));
    }
    const std::size_t half = input.dim / 2;
    // one frequency per sin/cos pair: base 10000, exponent 2*(pair)/half
    std::vector<double> inv_freq(half);
    for (std::size_t c = 0; c < half; ++c) {
        double expo = double(2 * (c / 2)) / double(half);
        inv_freq[c] = 1.0 / std::pow(10000.0, expo);
    }
    FeatureMap out = input;
    for (std::size_t y = 0; y < input.height; ++y) {
        for (std::size_t x = 0; x < input.width; ++x) {
            for (std::size_t c = 0; c < half; ++c) {
                double ax = double(x) * inv_freq[c];
                double ay = double(y) * inv_freq[c];
                out.at(y, x, c) += (c % 2 == 0) ? std::sin(ax) : std::cos(ax);
                out.at(y, x, half + c) += (c % 2 == 0) ? std::sin(ay) : std::cos(ay);
            }
        }
    }
    return out;
}

GridSampleResult grid_sample(const FeatureMap& map, std::size_t k_requested) {
    const std::size_t hw = map.pixels();
    if (hw == 0) throw ShapeError("grid_sample on an empty map");
    if (k_requested < 1 || k_requested > hw) {
        throw RangeError("grid_sample k_requested " + std::to_string(k_requested) +
                         " outside [1, " + std::to_string(hw) + "]");
    }
    const double f = std::sqrt(double(k_requested) / double(hw));
    std::size_t gw = std::size_t(double(map.width) * f);
    std::size_t gh = std::size_t(double(map.height) * f);
    if (gw < 1) gw = 1;
    if (gh < 1) gh = 1;

    GridSampleResult res;
    res.k_actual = gw * gh;
    res.features = Matrix(res.k_actual, map.dim);
    res.coords.reserve(res.k_actual);
    std::size_t row = 0;
    for (std::size_t i = 0; i < gh; ++i) {
        std::size_t y = std::size_t((double(i) + 0.5) * double(map.height) / double(gh));
        for (std::size_t j = 0; j < gw; ++j) {
            std::size_t x = std::size_t((double(j) + 0.5) * double(map.width) / double(gw));
            res.coords.push_back({y, x});
            for (std::size_t c = 0; c < map.dim; ++c) res.features(row, c) = map.at(y, x, c);
            ++row;
        }
    }
    return res;
}

}  // namespace emseg
