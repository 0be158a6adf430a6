#include "emseg/color.hpp"

#include <cmath>

namespace emseg {

namespace {

double srgb_linearize(std::uint8_t v) {
    const double u = double(v) / 255.0;
    return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
    constexpr double eps = 216.0 / 24389.0, kappa = 24389.0 / 27.0;
    return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
}

}  // namespace

std::array<double, 3> rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    const double r = srgb_linearize(r8), g = srgb_linearize(g8), b = srgb_linearize(b8);
    // linear sRGB to XYZ under the D65 white point
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / 0.95047), fy = lab_f(y), fz = lab_f(z / 1.08883);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

FeatureMap rgb_to_lab_map(const RgbImage& img) {
    FeatureMap out;
    out.height = img.height;
    out.width = img.width;
    out.dim = 3;
    out.data.resize(std::size_t(img.height) * img.width * 3);
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            auto lab = rgb_to_lab(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
            for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = lab[c];
        }
    }
    return out;
}

}  // namespace emseg
