#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "emseg/em.hpp"
#include "emseg/feature_map.hpp"
#include "emseg/ffn.hpp"

namespace emseg {

// Per-class FIFO queues of d-dimensional embeddings with bounded capacity.
// Mutation requires exclusive access; there is no internal locking.
class MemoryBank {
public:
    MemoryBank(std::size_t classes, std::size_t capacity, std::size_t dim);

    std::size_t classes() const { return queues_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t dim() const { return dim_; }

    const std::deque<std::vector<double>>& queue(std::size_t class_id) const;

    // appends embeddings in order, evicting the oldest entries past capacity
    void push(std::size_t class_id, const std::vector<std::vector<double>>& embeddings);

    // snapshot in the flat binary matrix-bundle format
    void save(const std::string& path) const;
    static MemoryBank load(const std::string& path);

private:
    std::size_t capacity_;
    std::size_t dim_;
    std::vector<std::deque<std::vector<double>>> queues_;
};

// one center per class: the FFN image of the element-wise queue average;
// any class with an empty queue is an error
CenterSet scene_agnostic_init(const MemoryBank& bank, const FfnHead& ffn);

// FFN image of the position-embedded map, thinned to a grid of k seed rows
// (grid_sample semantics, so the row count is the grid's k_actual)
CenterSet scene_adaptive_init(const FeatureMap& i, const FfnHead& ffn, std::size_t k);

struct SuperpixelInit {
    CenterSet centers;
    std::vector<PixelCoord> coords;
    std::size_t k_actual = 0;
};

// grid cell-center rows of the position-embedded map, then the FFN row-wise
SuperpixelInit superpixel_init(const FeatureMap& i, std::size_t k_requested, const FfnHead& ffn);

struct PanopticInit {
    CenterSet centers;  // stuff rows first, then thing rows
    std::size_t stuff_rows = 0;
    std::size_t thing_rows = 0;
};

// concatenates the scene-agnostic stuff queries (skipped when the bank has no
// classes) with the scene-adaptive thing queries (skipped when k_thing == 0)
PanopticInit panoptic_init(const MemoryBank& bank, const FeatureMap& i,
                           const FfnHead& ffn_stuff, const FfnHead& ffn_thing,
                           std::size_t k_thing);

}  // namespace emseg
