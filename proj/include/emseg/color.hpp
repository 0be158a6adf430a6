#pragma once

#include <array>
#include <cstdint>

#include "emseg/feature_map.hpp"
#include "emseg/image.hpp"

namespace emseg {

// sRGB (8-bit, D65) to CIE L*a*b*: inverse sRGB gamma, linear RGB -> XYZ,
// then the cube-root Lab transform against the D65 white point
std::array<double, 3> rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// per-pixel conversion of a whole image into an H x W x 3 map of (L, a, b)
FeatureMap rgb_to_lab_map(const RgbImage& img);

}  // namespace emseg
