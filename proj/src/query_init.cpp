#include "emseg/query_init.hpp"

#include <string>
#include <utility>

#include "emseg/error.hpp"
#include "emseg/weights_io.hpp"

namespace emseg {

MemoryBank::MemoryBank(std::size_t classes, std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim), queues_(classes) {
    if (capacity == 0) throw ConfigError("memory bank capacity must be >= 1");
    if (dim == 0) throw ConfigError("memory bank dim must be >= 1");
}

const std::deque<std::vector<double>>& MemoryBank::queue(std::size_t class_id) const {
    if (class_id >= queues_.size()) {
        throw RangeError("memory bank class " + std::to_string(class_id) + " out of range (" +
                         std::to_string(queues_.size()) + " classes)");
    }
    return queues_[class_id];
}

void MemoryBank::push(std::size_t class_id, const std::vector<std::vector<double>>& embeddings) {
    if (class_id >= queues_.size()) {
        throw RangeError("memory bank class " + std::to_string(class_id) + " out of range (" +
                         std::to_string(queues_.size()) + " classes)");
    }
    auto& q = queues_[class_id];
    for (const auto& e : embeddings) {
        if (e.size() != dim_) {
            throw ShapeError("memory bank push: embedding has dim " + std::to_string(e.size()) +
                             ", expected " + std::to_string(dim_));
        }
        q.push_back(e);
        if (q.size() > capacity_) q.pop_front();
    }
}

void MemoryBank::save(const std::string& path) const {
    std::vector<Matrix> bundle;
    bundle.reserve(queues_.size() + 1);
    Matrix meta(1, 3);
    meta(0, 0) = double(queues_.size());
    meta(0, 1) = double(capacity_);
    meta(0, 2) = double(dim_);
    bundle.push_back(std::move(meta));
    for (const auto& q : queues_) {
        Matrix m(q.size(), dim_);
        for (std::size_t r = 0; r < q.size(); ++r)
            for (std::size_t c = 0; c < dim_; ++c) m(r, c) = q[r][c];
        bundle.push_back(std::move(m));
    }
    save_bundle(path, bundle);
}

MemoryBank MemoryBank::load(const std::string& path) {
    std::vector<Matrix> bundle = load_bundle(path);
    if (bundle.empty() || bundle[0].rows() != 1 || bundle[0].cols() != 3) {
        throw ParseError("memory bank snapshot: missing 1x3 meta matrix", 0);
    }
    const auto as_count = [&](double v, const char* what) {
        if (v < 0.0 || v != double(std::size_t(v))) {
            throw ParseError(std::string("memory bank snapshot: bad ") + what, 0);
        }
        return std::size_t(v);
    };
    const std::size_t classes = as_count(bundle[0](0, 0), "class count");
    const std::size_t capacity = as_count(bundle[0](0, 1), "capacity");
    const std::size_t dim = as_count(bundle[0](0, 2), "dim");
    if (bundle.size() != classes + 1) {
        throw ParseError("memory bank snapshot: expected " + std::to_string(classes + 1) +
                             " matrices, found " + std::to_string(bundle.size()),
                         0);
    }
    MemoryBank bank(classes, capacity, dim);
    for (std::size_t ci = 0; ci < classes; ++ci) {
        const Matrix& m = bundle[ci + 1];
        if (m.cols() != dim) {
            throw ParseError("memory bank snapshot: class " + std::to_string(ci) +
                                 " queue has dim " + std::to_string(m.cols()),
                             0);
        }
        if (m.rows() > capacity) {
            throw ParseError("memory bank snapshot: class " + std::to_string(ci) +
                                 " queue exceeds capacity",
                             0);
        }
        std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(dim));
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < dim; ++c) rows[r][c] = m(r, c);
        bank.push(ci, rows);
    }
    return bank;
}

CenterSet scene_agnostic_init(const MemoryBank& bank, const FfnHead& ffn) {
    if (bank.classes() == 0) throw ConfigError("scene_agnostic_init: bank has no classes");
    if (ffn.in_dim() != bank.dim()) {
        throw ShapeError("scene_agnostic_init: head takes dim " + std::to_string(ffn.in_dim()) +
                         ", bank holds dim " + std::to_string(bank.dim()));
    }
    Matrix pooled(bank.classes(), bank.dim());
    for (std::size_t ci = 0; ci < bank.classes(); ++ci) {
        const auto& q = bank.queue(ci);
        if (q.empty()) throw EmptyQueueError(ci);
        std::vector<double> avg = avg_pool({q.begin(), q.end()});
        for (std::size_t c = 0; c < bank.dim(); ++c) pooled(ci, c) = avg[c];
    }
    CenterSet out;
    out.centers = ffn.apply(pooled);
    return out;
}

CenterSet scene_adaptive_init(const FeatureMap& i, const FfnHead& ffn, std::size_t k) {
    if (k == 0) throw RangeError("scene_adaptive_init: k must be >= 1");
    FeatureMap pe = position_embed(i);
    if (ffn.in_dim() != pe.dim) {
        throw ShapeError("scene_adaptive_init: head takes dim " + std::to_string(ffn.in_dim()) +
                         ", map has dim " + std::to_string(pe.dim));
    }
    Matrix mapped = ffn.apply(pe.to_matrix());
    GridSampleResult gs = grid_sample(FeatureMap::from_matrix(pe.height, pe.width, mapped), k);
    CenterSet out;
    out.centers = std::move(gs.features);
    return out;
}

SuperpixelInit superpixel_init(const FeatureMap& i, std::size_t k_requested, const FfnHead& ffn) {
    FeatureMap pe = position_embed(i);
    GridSampleResult gs = grid_sample(pe, k_requested);
    if (ffn.in_dim() != pe.dim) {
        throw ShapeError("superpixel_init: head takes dim " + std::to_string(ffn.in_dim()) +
                         ", map has dim " + std::to_string(pe.dim));
    }
    SuperpixelInit out;
    out.centers.centers = ffn.apply(gs.features);
    out.coords = std::move(gs.coords);
    out.k_actual = gs.k_actual;
    return out;
}

PanopticInit panoptic_init(const MemoryBank& bank, const FeatureMap& i, const FfnHead& ffn_stuff,
                           const FfnHead& ffn_thing, std::size_t k_thing) {
    PanopticInit out;
    Matrix stuff, thing;
    if (bank.classes() > 0) stuff = scene_agnostic_init(bank, ffn_stuff).centers;
    if (k_thing > 0) thing = scene_adaptive_init(i, ffn_thing, k_thing).centers;
    if (stuff.rows() == 0 && thing.rows() == 0) {
        throw ConfigError("panoptic_init: no stuff classes and k_thing == 0");
    }
    if (stuff.rows() > 0 && thing.rows() > 0 && stuff.cols() != thing.cols()) {
        throw ShapeError("panoptic_init: stuff dim " + std::to_string(stuff.cols()) +
                         " vs thing dim " + std::to_string(thing.cols()));
    }
    const std::size_t d = stuff.rows() > 0 ? stuff.cols() : thing.cols();
    out.stuff_rows = stuff.rows();
    out.thing_rows = thing.rows();
    out.centers.centers = Matrix(out.stuff_rows + out.thing_rows, d);
    for (std::size_t r = 0; r < stuff.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) out.centers.centers(r, c) = stuff(r, c);
    for (std::size_t r = 0; r < thing.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) out.centers.centers(out.stuff_rows + r, c) = thing(r, c);
    return out;
}

}  // namespace emseg
