#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emseg/em.hpp"
#include "emseg/feature_map.hpp"
#include "emseg/ffn.hpp"
#include "emseg/matrix.hpp"

namespace emseg {

// Projection weights for one attention layer. head_merge mixes the
// concatenated head outputs; with heads == 1 it must be the identity and is
// skipped, so single-head results involve exactly the three projections.
struct AttentionParams {
    Matrix w_q, w_k, w_v;  // d x d
    std::size_t heads = 1;
    Matrix head_merge;     // d x d

    static AttentionParams identity(std::size_t d);
    // Gaussian entries with standard deviation 1/sqrt(d), identity merge
    static AttentionParams seeded(std::size_t d, std::uint64_t seed, std::size_t heads = 1);
};

struct LayerTrace {
    std::vector<Matrix> soft_assignments;  // one k x (H*W) matrix per round
    Matrix final_centers;                  // k x d, no residual applied
    FlopCount flop_count = 0;              // exact multiply-add count
    std::uint64_t key_projections = 0;     // times keys were projected
    std::uint64_t value_projections = 0;   // times values were projected
};

// one attention pass where each query row normalizes over all pixels
// (softmax along the pixel axis); returns c + A*V (residual included)
CenterSet vanilla_cross_attention(const CenterSet& c, const FeatureMap& i,
                                  const AttentionParams& p, FlopCount* flops = nullptr);

// one attention pass where each pixel's scores normalize across clusters
// (softmax along the cluster axis); returns c + M*V (residual included)
CenterSet cluster_softmax_attention(const CenterSet& c, const FeatureMap& i,
                                    const AttentionParams& p, FlopCount* flops = nullptr);

// cluster-axis argmax (deterministic, ties -> lowest index) replaces the
// softmax with a one-hot assignment; returns c + M*V (residual included)
CenterSet hard_assignment_attention(const CenterSet& c, const FeatureMap& i,
                                    const AttentionParams& p, FlopCount* flops = nullptr);

// t rounds of soft assignment and center update. Keys and values are
// projected exactly once up front; each round re-projects only the queries
// from the current centers. No residual is applied inside the recurrence.
LayerTrace recurrent_cross_attention(const CenterSet& c0, const FeatureMap& i,
                                     const AttentionParams& p, std::size_t t);

// one decoder layer: attention weights plus the post-attention MLP
// (hidden width 2d, ReLU, applied with a residual)
struct DecoderLayer {
    AttentionParams attention;
    FfnHead mlp;
};

struct DecoderConfig {
    std::size_t levels = 3;
    // layers assigned to each pyramid level, coarse first; empty -> 2 per level
    std::vector<std::size_t> layers_per_level;
    std::size_t t_iterations = 3;
};

struct DecoderResult {
    CenterSet centers;
    std::vector<LayerTrace> traces;  // one per layer, coarsest level first
};

// Runs the layers over the pyramid (ordered coarse -> fine), threading the
// centers through: c = c + recurrence(level, c), then c = c + mlp(c).
// MLP multiply-adds are charged to the owning layer's trace.
DecoderResult decoder_stack(const CenterSet& c0, const std::vector<FeatureMap>& pyramid,
                            const std::vector<DecoderLayer>& layers, const DecoderConfig& cfg);

enum class AttentionVariant { vanilla, recurrent, stacked };

// Closed-form multiply-add counts for a forward pass (heads == 1):
//   recurrent: 2*hw*d^2 + t*(k*d^2 + 2*k*hw*d)
//              keys/values once, then per round one query projection, one
//              score product and one center update
//   vanilla:   3*hw*d^2 + 2*hw^2*d
//              one attention pass with a query per pixel; quadratic in the
//              pixel count, t plays no part
//   stacked:   t*(k*d^2 + 2*hw*d^2 + 2*k*hw*d)
//              t independent single-round layers, each re-projecting keys
//              and values
// All dims and t must be >= 1.
FlopCount flop_count(std::size_t h, std::size_t w, std::size_t k, std::size_t d,
                     std::size_t t, AttentionVariant variant);

struct RcaGradients {
    Matrix d_c0;       // k x d
    Matrix d_w_q, d_w_k, d_w_v;  // d x d
    Matrix d_features;  // (H*W) x d, pixel order
};

// Exact reverse-mode gradient of recurrent_cross_attention: contracts the
// upstream (k x d) cotangent of the final centers back through all t rounds,
// including the column-softmax Jacobian. heads must be 1.
RcaGradients rca_gradient(const CenterSet& c0, const FeatureMap& i,
                          const AttentionParams& p, std::size_t t, const Matrix& upstream);

}  // namespace emseg
