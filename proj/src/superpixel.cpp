#include "emseg/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emseg/color.hpp"
#include "emseg/error.hpp"

namespace emseg {

namespace {

struct GridDims {
    std::size_t gw, gh;
    std::size_t k_actual() const { return gw * gh; }
};

// same grid shape as grid_sample: floor(side * sqrt(k / HW)), clamped to >= 1
GridDims grid_dims(std::size_t h, std::size_t w, std::size_t k_requested) {
    const std::size_t hw = h * w;
    if (hw == 0) throw ShapeError("superpixel grid on an empty image");
    if (k_requested < 1 || k_requested > hw) {
        throw RangeError("k_requested " + std::to_string(k_requested) + " outside [1, " +
                         std::to_string(hw) + "]");
    }
    const double f = std::sqrt(double(k_requested) / double(hw));
    GridDims g;
    g.gw = std::max<std::size_t>(1, std::size_t(double(w) * f));
    g.gh = std::max<std::size_t>(1, std::size_t(double(h) * f));
    return g;
}

// cluster scores for every pixel: raw center-feature dot products, optionally
// corrected by -|c|^2/2 so the ordering matches Euclidean distance
Matrix score_pixels(const Matrix& centers, const Matrix& x_t, SeedScoring scoring,
                    FlopCount* flops) {
    Matrix scores = matmul(centers, x_t, flops);
    if (scoring == SeedScoring::nearest_center) {
        for (std::size_t k = 0; k < centers.rows(); ++k) {
            double sq = 0.0;
            for (std::size_t c = 0; c < centers.cols(); ++c) {
                sq += centers(k, c) * centers(k, c);
            }
            if (flops) *flops += centers.cols();
            const double corr = 0.5 * sq;
            for (std::size_t j = 0; j < scores.cols(); ++j) scores(k, j) -= corr;
        }
    }
    return scores;
}

}  // namespace

FeatureMap build_pixel_features(const FeatureMap& lab, const SuperpixelConfig& cfg) {
    if (lab.dim != 3) {
        throw ShapeError("build_pixel_features expects 3 color channels, got " +
                         std::to_string(lab.dim));
    }
    const GridDims g = grid_dims(lab.height, lab.width, cfg.k_requested);
    const double s = std::sqrt(double(lab.pixels()) / double(g.k_actual()));
    FeatureMap out(lab.height, lab.width, 5);
    for (std::size_t y = 0; y < lab.height; ++y) {
        for (std::size_t x = 0; x < lab.width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                out.at(y, x, c) = cfg.color_weight * lab.at(y, x, c);
            }
            out.at(y, x, 3) = cfg.position_weight * double(x) / s;
            out.at(y, x, 4) = cfg.position_weight * double(y) / s;
        }
    }
    return out;
}

SegmentationResult segment_superpixels(const RgbImage& img, const SuperpixelConfig& cfg) {
    if (cfg.use_ffn && cfg.ffn == nullptr) {
        throw ConfigError("segment_superpixels: use_ffn set without a head");
    }
    if (cfg.t_iterations == 0) {
        throw RangeError("segment_superpixels requires t_iterations >= 1");
    }
    FeatureMap lab = rgb_to_lab_map(img);
    FeatureMap feats = build_pixel_features(lab, cfg);

    SegmentationResult res;
    res.k_requested = cfg.k_requested;
    res.iterations = cfg.t_iterations;

    if (cfg.use_ffn) {
        if (cfg.ffn->in_dim() != feats.dim) {
            throw ShapeError("segment_superpixels: head takes dim " +
                             std::to_string(cfg.ffn->in_dim()) + ", features have dim " +
                             std::to_string(feats.dim));
        }
        Matrix mapped = cfg.ffn->apply(feats.to_matrix(), &res.flops);
        feats = FeatureMap::from_matrix(feats.height, feats.width, mapped);
    }

    GridSampleResult seeds = grid_sample(feats, cfg.k_requested);
    Matrix centers = std::move(seeds.features);
    const Matrix x = feats.to_matrix();
    const Matrix x_t = transpose(x);
    const std::size_t hw = x.rows(), d = x.cols(), k = centers.rows();

    // Rounds 1..t-1 refine the centers; the segmentation is the hard argmax
    // of the last round's assignment (raw scores order columns the same way
    // the softmax does, so the exponentials are skipped).
    LabelMap labels(img.height, img.width);
    for (std::size_t round = 0; round < cfg.t_iterations; ++round) {
        Matrix scores = score_pixels(centers, x_t, cfg.scoring, &res.flops);
        if (round + 1 == cfg.t_iterations) {
            for (std::size_t j = 0; j < hw; ++j) {
                std::size_t best = 0;
                for (std::size_t ki = 1; ki < k; ++ki) {
                    if (scores(ki, j) > scores(best, j)) best = ki;
                }
                labels.labels[j] = std::int32_t(best);
            }
            break;
        }
        Matrix soft = softmax_axis(scores, Axis::cols);
        Matrix numer = matmul(soft, x, &res.flops);
        if (cfg.update == CenterUpdate::sum) {
            centers = std::move(numer);
            continue;
        }
        // softmax masses are positive unless a row underflows everywhere; a
        // dead row keeps its previous center (the pipeline stays RNG-free)
        for (std::size_t ki = 0; ki < k; ++ki) {
            double mass = 0.0;
            for (std::size_t j = 0; j < hw; ++j) mass += soft(ki, j);
            if (mass == 0.0) continue;
            for (std::size_t c = 0; c < d; ++c) centers(ki, c) = numer(ki, c) / mass;
        }
    }

    res.labels = enforce_connectivity(labels, cfg.min_region_frac);
    res.k_actual = res.labels.label_count();
    return res;
}

LabelMap enforce_connectivity(const LabelMap& labels, double min_region_frac) {
    const std::size_t h = labels.height, w = labels.width, hw = h * w;
    if (hw == 0) throw ShapeError("enforce_connectivity on an empty map");
    const std::size_t input_labels = labels.label_count();
    if (input_labels == 0) throw RangeError("enforce_connectivity: negative labels");
    const double threshold = min_region_frac * (double(hw) / double(input_labels));

    // 4-connected components in row-major first-encounter order
    std::vector<std::int32_t> comp(hw, -1);
    std::vector<std::size_t> comp_size;
    std::vector<std::int32_t> comp_label;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < hw; ++start) {
        if (comp[start] != -1) continue;
        const std::int32_t id = std::int32_t(comp_size.size());
        const std::int32_t lab = labels.labels[start];
        if (lab < 0) throw RangeError("enforce_connectivity: negative labels");
        comp_size.push_back(0);
        comp_label.push_back(lab);
        stack.assign(1, start);
        comp[start] = id;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++comp_size[std::size_t(id)];
            const std::size_t y = p / w, x = p % w;
            const std::size_t nb[4] = {y > 0 ? p - w : p, y + 1 < h ? p + w : p,
                                       x > 0 ? p - 1 : p, x + 1 < w ? p + 1 : p};
            for (std::size_t q : nb) {
                if (q != p && comp[q] == -1 && labels.labels[q] == lab) {
                    comp[q] = id;
                    stack.push_back(q);
                }
            }
        }
    }

    const std::size_t n_comp = comp_size.size();
    std::vector<std::size_t> label_comp_count(input_labels, 0);
    for (std::int32_t lab : comp_label) ++label_comp_count[std::size_t(lab)];
    bool valid = true;
    for (std::size_t c = 0; c < n_comp && valid; ++c) {
        if (double(comp_size[c]) < threshold) valid = false;
    }
    for (std::size_t l = 0; l < input_labels && valid; ++l) {
        if (label_comp_count[l] != 1) valid = false;
    }
    if (valid) return labels;

    // absorb small components, smallest first, into their largest neighbor
    std::vector<std::size_t> small;
    for (std::size_t c = 0; c < n_comp; ++c) {
        if (double(comp_size[c]) < threshold) small.push_back(c);
    }
    std::sort(small.begin(), small.end(), [&](std::size_t a, std::size_t b) {
        if (comp_size[a] != comp_size[b]) return comp_size[a] < comp_size[b];
        return a < b;
    });
    // alias chain: comp -> surviving comp it was merged into
    std::vector<std::int32_t> merged_into(n_comp);
    for (std::size_t c = 0; c < n_comp; ++c) merged_into[c] = std::int32_t(c);
    auto resolve = [&](std::int32_t c) {
        while (merged_into[std::size_t(c)] != c) c = merged_into[std::size_t(c)];
        return c;
    };
    for (std::size_t sc : small) {
        if (resolve(std::int32_t(sc)) != std::int32_t(sc)) continue;  // already absorbed
        std::int32_t target = -1;
        std::size_t target_size = 0;
        for (std::size_t p = 0; p < hw; ++p) {
            if (resolve(comp[p]) != std::int32_t(sc)) continue;
            const std::size_t y = p / w, x = p % w;
            const std::size_t nb[4] = {y > 0 ? p - w : p, y + 1 < h ? p + w : p,
                                       x > 0 ? p - 1 : p, x + 1 < w ? p + 1 : p};
            for (std::size_t q : nb) {
                if (q == p) continue;
                const std::int32_t oc = resolve(comp[q]);
                if (oc == std::int32_t(sc)) continue;
                const std::size_t os = comp_size[std::size_t(oc)];
                if (target == -1 || os > target_size ||
                    (os == target_size && oc < target)) {
                    target = oc;
                    target_size = os;
                }
            }
        }
        if (target == -1) continue;  // the whole image is one component
        comp_size[std::size_t(target)] += comp_size[sc];
        merged_into[sc] = target;
    }

    LabelMap out(h, w);
    std::vector<std::int32_t> new_label(n_comp, -1);
    std::int32_t next = 0;
    for (std::size_t p = 0; p < hw; ++p) {
        const std::int32_t c = resolve(comp[p]);
        if (new_label[std::size_t(c)] == -1) new_label[std::size_t(c)] = next++;
        out.labels[p] = new_label[std::size_t(c)];
    }
    return out;
}

double asa(const LabelMap& labels, const LabelMap& gt) {
    if (labels.height != gt.height || labels.width != gt.width) {
        throw ShapeError("asa: label map and ground truth sizes differ");
    }
    const std::size_t hw = labels.labels.size();
    if (hw == 0) throw ShapeError("asa on an empty map");
    std::unordered_map<std::int64_t, std::size_t> overlap;
    for (std::size_t p = 0; p < hw; ++p) {
        const std::int64_t key = (std::int64_t(labels.labels[p]) << 32) |
                                 std::int64_t(std::uint32_t(gt.labels[p]));
        ++overlap[key];
    }
    std::unordered_map<std::int32_t, std::size_t> best;
    for (const auto& [key, count] : overlap) {
        const std::int32_t sp = std::int32_t(key >> 32);
        auto it = best.find(sp);
        if (it == best.end() || count > it->second) best[sp] = count;
    }
    std::size_t covered = 0;
    for (const auto& [sp, count] : best) covered += count;
    return double(covered) / double(hw);
}

double compactness(const LabelMap& labels) {
    const std::size_t h = labels.height, w = labels.width, hw = h * w;
    if (hw == 0) throw ShapeError("compactness on an empty map");
    const std::size_t n = labels.label_count();
    std::vector<std::size_t> area(n, 0), perim(n, 0);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::int32_t v = labels.at(y, x);
            ++area[std::size_t(v)];
            std::size_t sides = 0;
            if (y == 0 || labels.at(y - 1, x) != v) ++sides;
            if (y + 1 == h || labels.at(y + 1, x) != v) ++sides;
            if (x == 0 || labels.at(y, x - 1) != v) ++sides;
            if (x + 1 == w || labels.at(y, x + 1) != v) ++sides;
            perim[std::size_t(v)] += sides;
        }
    }
    constexpr double four_pi = 4.0 * 3.14159265358979323846;
    double total = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        if (area[l] == 0) continue;
        const double q = four_pi * double(area[l]) / (double(perim[l]) * double(perim[l]));
        total += (double(area[l]) / double(hw)) * std::min(1.0, q);
    }
    return total;
}

LabelMap slic_baseline(const RgbImage& img, std::size_t k_requested, double compactness_weight,
                       std::size_t iters) {
    FeatureMap lab = rgb_to_lab_map(img);
    const std::size_t h = img.height, w = img.width, hw = h * w;
    const GridDims g = grid_dims(h, w, k_requested);
    const std::size_t k = g.k_actual();
    const double s = std::sqrt(double(hw) / double(k));

    // SLIC distance = Euclidean over [L, a, b, m*x/S, m*y/S]
    SuperpixelConfig fcfg;
    fcfg.k_requested = k_requested;
    fcfg.color_weight = 1.0;
    fcfg.position_weight = compactness_weight;
    FeatureMap feats = build_pixel_features(lab, fcfg);
    GridSampleResult seeds = grid_sample(feats, k_requested);

    Matrix centers = std::move(seeds.features);
    std::vector<double> cy(k), cx(k);
    for (std::size_t ki = 0; ki < k; ++ki) {
        cy[ki] = double(seeds.coords[ki].y);
        cx[ki] = double(seeds.coords[ki].x);
    }

    const std::size_t d = feats.dim;
    std::vector<std::int32_t> assign(hw);
    auto sq_dist = [&](std::size_t ki, std::size_t p) {
        double acc = 0.0;
        const double* f = &feats.data[p * d];
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = centers(ki, c) - f[c];
            acc += diff * diff;
        }
        return acc;
    };
    auto assignment_pass = [&]() {
        std::vector<double> dist(hw, std::numeric_limits<double>::infinity());
        std::fill(assign.begin(), assign.end(), -1);
        for (std::size_t ki = 0; ki < k; ++ki) {
            const std::size_t y0 = std::size_t(std::max(0.0, cy[ki] - 2.0 * s));
            const std::size_t y1 = std::min(h - 1, std::size_t(std::max(0.0, cy[ki] + 2.0 * s)));
            const std::size_t x0 = std::size_t(std::max(0.0, cx[ki] - 2.0 * s));
            const std::size_t x1 = std::min(w - 1, std::size_t(std::max(0.0, cx[ki] + 2.0 * s)));
            for (std::size_t y = y0; y <= y1; ++y) {
                for (std::size_t x = x0; x <= x1; ++x) {
                    const std::size_t p = y * w + x;
                    const double dd = sq_dist(ki, p);
                    if (dd < dist[p]) {
                        dist[p] = dd;
                        assign[p] = std::int32_t(ki);
                    }
                }
            }
        }
        // pixels outside every window fall back to the globally nearest center
        for (std::size_t p = 0; p < hw; ++p) {
            if (assign[p] != -1) continue;
            double bd = sq_dist(0, p);
            std::int32_t bk = 0;
            for (std::size_t ki = 1; ki < k; ++ki) {
                const double dd = sq_dist(ki, p);
                if (dd < bd) {
                    bd = dd;
                    bk = std::int32_t(ki);
                }
            }
            assign[p] = bk;
        }
    };

    for (std::size_t round = 0; round < iters; ++round) {
        assignment_pass();
        std::vector<double> fsum(k * d, 0.0), ysum(k, 0.0), xsum(k, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t p = 0; p < hw; ++p) {
            const std::size_t ki = std::size_t(assign[p]);
            const double* f = &feats.data[p * d];
            for (std::size_t c = 0; c < d; ++c) fsum[ki * d + c] += f[c];
            ysum[ki] += double(p / w);
            xsum[ki] += double(p % w);
            ++count[ki];
        }
        for (std::size_t ki = 0; ki < k; ++ki) {
            if (count[ki] == 0) continue;  // empty cluster keeps its center
            for (std::size_t c = 0; c < d; ++c) centers(ki, c) = fsum[ki * d + c] / double(count[ki]);
            cy[ki] = ysum[ki] / double(count[ki]);
            cx[ki] = xsum[ki] / double(count[ki]);
        }
    }
    assignment_pass();

    LabelMap labels(h, w);
    for (std::size_t p = 0; p < hw; ++p) labels.labels[p] = assign[p];
    return enforce_connectivity(labels, 0.25);
}

}  // namespace emseg
