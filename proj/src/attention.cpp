#include "emseg/attention.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "emseg/error.hpp"
#include "emseg/rng.hpp"

namespace emseg {

namespace {

enum class ScoreNorm { pixel_softmax, cluster_softmax, cluster_argmax };

void validate_attention(const CenterSet& c, const FeatureMap& i, const AttentionParams& p) {
    const std::size_t d = c.dim();
    if (c.k() == 0 || d == 0) throw ShapeError("attention: empty center set");
    if (i.pixels() == 0) throw ShapeError("attention: empty feature map");
    if (i.dim != d) {
        throw ShapeError("attention: feature dim " + std::to_string(i.dim) +
                         " vs center dim " + std::to_string(d));
    }
    auto square = [d](const Matrix& m, const char* name) {
        if (m.rows() != d || m.cols() != d) {
            throw ShapeError("attention: " + std::string(name) + " is " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             ", expected " + std::to_string(d) + "x" + std::to_string(d));
        }
    };
    square(p.w_q, "w_q");
    square(p.w_k, "w_k");
    square(p.w_v, "w_v");
    if (p.heads == 0) throw ConfigError("attention: heads must be >= 1");
    if (d % p.heads != 0) {
        throw ConfigError("attention: heads " + std::to_string(p.heads) +
                          " does not divide dim " + std::to_string(d));
    }
    if (p.heads > 1) square(p.head_merge, "head_merge");
}

Matrix col_slice(const Matrix& m, std::size_t c0, std::size_t c1) {
    Matrix out(m.rows(), c1 - c0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = c0; c < c1; ++c) out(r, c - c0) = m(r, c);
    return out;
}

void paste_cols(Matrix& dst, const Matrix& src, std::size_t c0) {
    for (std::size_t r = 0; r < src.rows(); ++r)
        for (std::size_t c = 0; c < src.cols(); ++c) dst(r, c0 + c) = src(r, c);
}

// one-hot per column over the cluster axis, ties -> lowest index
Matrix onehot_column_argmax(const Matrix& scores) {
    Matrix out(scores.rows(), scores.cols());
    for (std::size_t c = 0; c < scores.cols(); ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < scores.rows(); ++r)
            if (scores(r, c) > scores(best, c)) best = r;
        out(best, c) = 1.0;
    }
    return out;
}

// Per-head scores, normalization and center update. Heads see disjoint
// d/heads column slices; outputs are concatenated back in head order. When
// trace_assign is given it receives the head-averaged assignment matrix.
Matrix heads_attend(const Matrix& q, const Matrix& kp, const Matrix& vp,
                    const AttentionParams& p, ScoreNorm norm, FlopCount* flops,
                    Matrix* trace_assign) {
    const std::size_t d = q.cols(), heads = p.heads, dh = d / heads;
    Matrix out(q.rows(), d);
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t c0 = h * dh, c1 = c0 + dh;
        Matrix qh = heads == 1 ? q : col_slice(q, c0, c1);
        Matrix kh = heads == 1 ? kp : col_slice(kp, c0, c1);
        Matrix vh = heads == 1 ? vp : col_slice(vp, c0, c1);
        Matrix scores = matmul(qh, transpose(kh), flops);
        Matrix assign;
        switch (norm) {
            case ScoreNorm::pixel_softmax: assign = softmax_axis(scores, Axis::rows); break;
            case ScoreNorm::cluster_softmax: assign = softmax_axis(scores, Axis::cols); break;
            case ScoreNorm::cluster_argmax: assign = onehot_column_argmax(scores); break;
        }
        if (trace_assign) {
            if (h == 0) {
                *trace_assign = assign;
            } else {
                *trace_assign = add(*trace_assign, assign);
            }
        }
        Matrix part = matmul(assign, vh, flops);
        if (heads == 1) {
            out = std::move(part);
        } else {
            paste_cols(out, part, c0);
        }
    }
    if (trace_assign && heads > 1) *trace_assign = scale(*trace_assign, 1.0 / double(heads));
    return out;
}

CenterSet attention_pass(const CenterSet& c, const FeatureMap& i, const AttentionParams& p,
                         ScoreNorm norm, FlopCount* flops) {
    validate_attention(c, i, p);
    Matrix x = i.to_matrix();
    Matrix q = matmul(c.centers, p.w_q, flops);
    Matrix kp = matmul(x, p.w_k, flops);
    Matrix vp = matmul(x, p.w_v, flops);
    Matrix upd = heads_attend(q, kp, vp, p, norm, flops, nullptr);
    if (p.heads > 1) upd = matmul(upd, p.head_merge, flops);
    CenterSet out;
    out.centers = add(c.centers, upd);
    return out;
}

}  // namespace

AttentionParams AttentionParams::identity(std::size_t d) {
    AttentionParams p;
    p.w_q = Matrix::identity(d);
    p.w_k = Matrix::identity(d);
    p.w_v = Matrix::identity(d);
    p.heads = 1;
    p.head_merge = Matrix::identity(d);
    return p;
}

AttentionParams AttentionParams::seeded(std::size_t d, std::uint64_t seed, std::size_t heads) {
    AttentionParams p;
    Rng rng(seed);
    const double s = 1.0 / std::sqrt(double(d));
    auto gauss = [&](Matrix& m) {
        m = Matrix(d, d);
        for (double& v : m.data()) v = rng.gaussian() * s;
    };
    gauss(p.w_q);
    gauss(p.w_k);
    gauss(p.w_v);
    p.heads = heads;
    p.head_merge = Matrix::identity(d);
    return p;
}

CenterSet vanilla_cross_attention(const CenterSet& c, const FeatureMap& i,
                                  const AttentionParams& p, FlopCount* flops) {
    return attention_pass(c, i, p, ScoreNorm::pixel_softmax, flops);
}

CenterSet cluster_softmax_attention(const CenterSet& c, const FeatureMap& i,
                                    const AttentionParams& p, FlopCount* flops) {
    return attention_pass(c, i, p, ScoreNorm::cluster_softmax, flops);
}

CenterSet hard_assignment_attention(const CenterSet& c, const FeatureMap& i,
                                    const AttentionParams& p, FlopCount* flops) {
    return attention_pass(c, i, p, ScoreNorm::cluster_argmax, flops);
}

LayerTrace recurrent_cross_attention(const CenterSet& c0, const FeatureMap& i,
                                     const AttentionParams& p, std::size_t t) {
    if (t == 0) throw RangeError("recurrent_cross_attention requires t >= 1");
    validate_attention(c0, i, p);
    LayerTrace tr;
    Matrix x = i.to_matrix();
    Matrix kp = matmul(x, p.w_k, &tr.flop_count);
    tr.key_projections = 1;
    Matrix vp = matmul(x, p.w_v, &tr.flop_count);
    tr.value_projections = 1;
    Matrix c = c0.centers;
    for (std::size_t step = 0; step < t; ++step) {
        Matrix q = matmul(c, p.w_q, &tr.flop_count);
        Matrix assign;
        Matrix next = heads_attend(q, kp, vp, p, ScoreNorm::cluster_softmax, &tr.flop_count,
                                   &assign);
        if (p.heads > 1) next = matmul(next, p.head_merge, &tr.flop_count);
        tr.soft_assignments.push_back(std::move(assign));
        c = std::move(next);
    }
    tr.final_centers = std::move(c);
    return tr;
}

DecoderResult decoder_stack(const CenterSet& c0, const std::vector<FeatureMap>& pyramid,
                            const std::vector<DecoderLayer>& layers, const DecoderConfig& cfg) {
    if (cfg.levels == 0) throw ConfigError("decoder_stack: levels must be >= 1");
    if (cfg.t_iterations == 0) throw RangeError("decoder_stack: t_iterations must be >= 1");
    std::vector<std::size_t> per_level = cfg.layers_per_level;
    if (per_level.empty()) per_level.assign(cfg.levels, 2);
    if (per_level.size() != cfg.levels) {
        throw ConfigError("decoder_stack: layers_per_level has " +
                          std::to_string(per_level.size()) + " entries for " +
                          std::to_string(cfg.levels) + " levels");
    }
    std::size_t total = 0;
    for (std::size_t n : per_level) total += n;
    if (pyramid.size() != cfg.levels) {
        throw ConfigError("decoder_stack: pyramid has " + std::to_string(pyramid.size()) +
                          " maps for " + std::to_string(cfg.levels) + " levels");
    }
    if (layers.size() != total) {
        throw ConfigError("decoder_stack: expected " + std::to_string(total) + " layers, got " +
                          std::to_string(layers.size()));
    }

    DecoderResult res;
    res.centers = c0;
    std::size_t li = 0;
    for (std::size_t level = 0; level < cfg.levels; ++level) {
        for (std::size_t j = 0; j < per_level[level]; ++j, ++li) {
            LayerTrace tr = recurrent_cross_attention(res.centers, pyramid[level],
                                                      layers[li].attention, cfg.t_iterations);
            res.centers.centers = add(res.centers.centers, tr.final_centers);
            Matrix mlp_out = layers[li].mlp.apply(res.centers.centers, &tr.flop_count);
            res.centers.centers = add(res.centers.centers, mlp_out);
            res.traces.push_back(std::move(tr));
        }
    }
    return res;
}

FlopCount flop_count(std::size_t h, std::size_t w, std::size_t k, std::size_t d, std::size_t t,
                     AttentionVariant variant) {
    if (h < 1 || w < 1 || k < 1 || d < 1) {
        throw RangeError("flop_count: all dimensions must be >= 1");
    }
    if (t < 1) throw RangeError("flop_count: t must be >= 1");
    const FlopCount hw = FlopCount(h) * w, K = k, D = d, T = t;
    switch (variant) {
        case AttentionVariant::recurrent:
            return 2 * hw * D * D + T * (K * D * D + 2 * K * hw * D);
        case AttentionVariant::vanilla:
            return 3 * hw * D * D + 2 * hw * hw * D;
        case AttentionVariant::stacked:
            return T * (K * D * D + 2 * hw * D * D + 2 * K * hw * D);
    }
    throw ConfigError("flop_count: unknown variant");
}

}  // namespace emseg
