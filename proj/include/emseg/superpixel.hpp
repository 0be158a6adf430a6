#pragma once

#include <cstddef>

#include "emseg/em.hpp"
#include "emseg/feature_map.hpp"
#include "emseg/ffn.hpp"
#include "emseg/image.hpp"
#include "emseg/matrix.hpp"

namespace emseg {

// Scoring used for soft assignment and final labeling. Raw dot products are
// linear in the pixel features, so on coordinate channels the largest-norm
// center wins over entire half-planes; nearest_center subtracts half the
// squared center norm, which orders scores by Euclidean distance while
// keeping the softmax form.
enum class SeedScoring { nearest_center, dot_product };

struct SuperpixelConfig {
    std::size_t k_requested = 100;
    std::size_t t_iterations = 3;  // assignment rounds; must be >= 1
    double color_weight = 1.0;
    double position_weight = 10.0;
    double min_region_frac = 0.25;  // of the mean superpixel area
    bool use_ffn = false;
    const FfnHead* ffn = nullptr;  // consulted only when use_ffn is set
    SeedScoring scoring = SeedScoring::nearest_center;
    CenterUpdate update = CenterUpdate::weighted_mean;
};

// Five channels per pixel: color-weighted L, a, b and position-weighted
// x/S, y/S, where S = sqrt(H*W / k_actual) is the seed grid pitch implied
// by cfg.k_requested.
FeatureMap build_pixel_features(const FeatureMap& lab, const SuperpixelConfig& cfg);

struct SegmentationResult {
    LabelMap labels;
    std::size_t k_requested = 0;
    std::size_t k_actual = 0;  // label count after connectivity enforcement
    std::size_t iterations = 0;
    FlopCount flops = 0;  // multiply-adds spent in scoring and center updates
};

// features -> grid seeds -> t assignment rounds (all but the last also update
// the centers) -> hard argmax of the final round's assignment ->
// enforce_connectivity. With t == 1 pixels join their nearest raw seed.
SegmentationResult segment_superpixels(const RgbImage& img, const SuperpixelConfig& cfg);

// Gives every 4-connected component its own label, then absorbs components
// smaller than min_region_frac * (H*W / label_count(input)) into their
// largest adjacent component. Valid maps (one component per label, all large
// enough) pass through unchanged; otherwise labels are renumbered
// contiguously in row-major first-encounter order.
LabelMap enforce_connectivity(const LabelMap& labels, double min_region_frac);

// achievable segmentation accuracy: the fraction of pixels covered when each
// superpixel claims its best-overlapping ground-truth segment
double asa(const LabelMap& labels, const LabelMap& gt);

// area-weighted isoperimetric quotient min(1, 4*pi*A / P^2); the perimeter
// counts 4-neighbor label changes and image-border sides
double compactness(const LabelMap& labels);

// Classic grid-seeded local clustering baseline: seeds on the same grid,
// iters rounds of nearest-center assignment within a 2S x 2S window around
// each center (SLIC distance = Euclidean over the same weighted features,
// position weight = compactness_weight), hard mean updates, then the same
// connectivity enforcement. iters == 0 labels pixels by their nearest seed.
LabelMap slic_baseline(const RgbImage& img, std::size_t k_requested,
                       double compactness_weight, std::size_t iters);

}  // namespace emseg
