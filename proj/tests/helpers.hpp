#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "emseg/feature_map.hpp"
#include "emseg/image.hpp"
#include "emseg/matrix.hpp"
#include "emseg/rng.hpp"

namespace test_util {

inline emseg::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, emseg::Rng& rng) {
    emseg::Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.gaussian();
    return m;
}

inline emseg::FeatureMap gaussian_map(std::size_t h, std::size_t w, std::size_t d,
                                      emseg::Rng& rng) {
    emseg::FeatureMap map(h, w, d);
    for (double& v : map.data) v = rng.gaussian();
    return map;
}

// true when every label in [0, label_count) forms exactly one 4-connected
// component and no other labels appear
inline bool one_component_per_label(const emseg::LabelMap& map) {
    const std::size_t h = map.height, w = map.width, hw = h * w;
    if (hw == 0) return false;
    const std::size_t n = map.label_count();
    std::vector<char> seen_label(n, 0);
    std::vector<char> visited(hw, 0);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < hw; ++start) {
        if (visited[start]) continue;
        const std::int32_t lab = map.labels[start];
        if (lab < 0 || std::size_t(lab) >= n) return false;
        if (seen_label[std::size_t(lab)]) return false;  // second component of this label
        seen_label[std::size_t(lab)] = 1;
        stack.assign(1, start);
        visited[start] = 1;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const std::size_t y = p / w, x = p % w;
            const std::size_t nb[4] = {y > 0 ? p - w : p, y + 1 < h ? p + w : p,
                                       x > 0 ? p - 1 : p, x + 1 < w ? p + 1 : p};
            for (std::size_t q : nb) {
                if (q != p && !visited[q] && map.labels[q] == lab) {
                    visited[q] = 1;
                    stack.push_back(q);
                }
            }
        }
    }
    for (char s : seen_label) {
        if (!s) return false;  // a label in range never appeared
    }
    return true;
}

// deterministic synthetic test scene: colored blocks with per-pixel noise
inline emseg::RgbImage texture_image(std::size_t h, std::size_t w, std::uint64_t seed,
                                     emseg::LabelMap* gt_out) {
    emseg::Rng rng(seed);
    // a handful of random region sites; each pixel joins the nearest site
    const std::size_t sites = 6 + rng.below(5);
    std::vector<double> sy(sites), sx(sites);
    std::vector<std::array<double, 3>> color(sites);
    for (std::size_t s = 0; s < sites; ++s) {
        sy[s] = rng.uniform01() * double(h);
        sx[s] = rng.uniform01() * double(w);
        for (auto& ch : color[s]) ch = 40.0 + rng.uniform01() * 175.0;
    }
    emseg::RgbImage img(h, w);
    emseg::LabelMap gt(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            std::size_t best = 0;
            double best_d = 0.0;
            for (std::size_t s = 0; s < sites; ++s) {
                const double dy = double(y) - sy[s], dx = double(x) - sx[s];
                const double dd = dy * dy + dx * dx;
                if (s == 0 || dd < best_d) {
                    best_d = dd;
                    best = s;
                }
            }
            gt.at(y, x) = std::int32_t(best);
            for (std::size_t c = 0; c < 3; ++c) {
                double v = color[best][c] + (rng.uniform01() - 0.5) * 24.0 +
                           12.0 * double(x) / double(w);
                img.at(y, x, c) = std::uint8_t(std::min(255.0, std::max(0.0, v)));
            }
        }
    }
    if (gt_out) *gt_out = gt;
    return img;
}

// salt-and-pepper sensor noise: each pixel is replaced by a uniformly random
// color with the given probability
inline void add_impulse_noise(emseg::RgbImage& img, double rate, std::uint64_t seed) {
    emseg::Rng rng(seed);
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            if (rng.uniform01() < rate) {
                for (std::size_t c = 0; c < 3; ++c) {
                    img.at(y, x, c) = std::uint8_t(rng.below(256));
                }
            }
        }
    }
}

// 64x64 four-quadrant scene with saturated distinct colors
inline emseg::RgbImage quadrant_image(emseg::LabelMap* gt_out) {
    emseg::RgbImage img(64, 64);
    emseg::LabelMap gt(64, 64);
    const std::uint8_t colors[4][3] = {{220, 30, 30}, {30, 220, 30}, {30, 30, 220},
                                       {220, 220, 30}};
    for (std::size_t y = 0; y < 64; ++y) {
        for (std::size_t x = 0; x < 64; ++x) {
            const std::size_t q = (y >= 32 ? 2 : 0) + (x >= 32 ? 1 : 0);
            gt.at(y, x) = std::int32_t(q);
            for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = colors[q][c];
        }
    }
    if (gt_out) *gt_out = gt;
    return img;
}

}  // namespace test_util
