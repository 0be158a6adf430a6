#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <deque>

#include "emseg/error.hpp"
#include "emseg/ffn.hpp"
#include "emseg/query_init.hpp"
#include "emseg/rng.hpp"
#include "helpers.hpp"

using emseg::FeatureMap;
using emseg::FfnHead;
using emseg::Matrix;
using emseg::MemoryBank;

namespace {

FfnHead passthrough(std::size_t d) {
    // identity weights, zero biases: exact pass-through for non-negative input
    FfnHead f = FfnHead::zero(d, d, d);
    f.w1 = Matrix::identity(d);
    f.w2 = Matrix::identity(d);
    return f;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("qi_scratch_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("ffn applies relu between its two layers") {
    FfnHead f = passthrough(2);
    f.b1 = {0.0, -1.0};
    Matrix rows(1, 2);
    rows(0, 0) = 0.5;
    rows(0, 1) = 0.25;  // second hidden unit lands at -0.75 and clamps to 0
    emseg::FlopCount flops = 0;
    Matrix out = f.apply(rows, &flops);
    CHECK(out(0, 0) == doctest::Approx(0.5));
    CHECK(out(0, 1) == doctest::Approx(0.0));
    CHECK(flops == 1 * 2 * 2 + 1 * 2 * 2);
    CHECK(FfnHead::seeded(3, 6, 3, 1).apply(Matrix(2, 3)).rows() == 2);
    CHECK_THROWS_AS((void)f.apply(Matrix(1, 3)), emseg::ShapeError);
}

TEST_CASE("memory bank validates construction and access") {
    CHECK_THROWS_AS(MemoryBank(2, 0, 3), emseg::ConfigError);
    CHECK_THROWS_AS(MemoryBank(2, 4, 0), emseg::ConfigError);
    MemoryBank bank(2, 4, 3);
    CHECK(bank.classes() == 2);
    CHECK(bank.capacity() == 4);
    CHECK(bank.dim() == 3);
    CHECK_THROWS_AS((void)bank.queue(2), emseg::RangeError);
    CHECK_THROWS_AS(bank.push(5, {{1.0, 2.0, 3.0}}), emseg::RangeError);
    CHECK_THROWS_AS(bank.push(0, {{1.0, 2.0}}), emseg::ShapeError);
}

TEST_CASE("bank queues evict oldest entries beyond capacity") {
    MemoryBank bank(1, 3, 1);
    bank.push(0, {{1.0}, {2.0}});
    bank.push(0, {{3.0}, {4.0}});
    const auto& q = bank.queue(0);
    REQUIRE(q.size() == 3);
    CHECK(q[0][0] == 2.0);
    CHECK(q[1][0] == 3.0);
    CHECK(q[2][0] == 4.0);
}

TEST_CASE("randomized bank pushes match a reference model") {
    emseg::Rng rng(17);
    const std::size_t classes = 3, cap = 5, dim = 2;
    MemoryBank bank(classes, cap, dim);
    std::vector<std::deque<std::vector<double>>> model(classes);
    for (int op = 0; op < 300; ++op) {
        const std::size_t cls = rng.below(classes);
        const std::size_t count = 1 + rng.below(4);
        std::vector<std::vector<double>> batch;
        for (std::size_t i = 0; i < count; ++i) {
            batch.push_back({rng.uniform01(), rng.uniform01()});
            model[cls].push_back(batch.back());
            if (model[cls].size() > cap) model[cls].pop_front();
        }
        bank.push(cls, batch);
        for (std::size_t c = 0; c < classes; ++c) {
            REQUIRE(bank.queue(c).size() == model[c].size());
            for (std::size_t i = 0; i < model[c].size(); ++i) {
                CHECK(bank.queue(c)[i] == model[c][i]);
            }
        }
    }
}

TEST_CASE("bank snapshots round-trip exactly") {
    emseg::Rng rng(23);
    MemoryBank bank(3, 4, 2);
    for (int op = 0; op < 40; ++op) {
        bank.push(rng.below(3), {{rng.gaussian(), rng.gaussian()}});
    }
    TempFile f("bank.bin");
    bank.save(f.path);
    MemoryBank back = MemoryBank::load(f.path);
    CHECK(back.classes() == 3);
    CHECK(back.capacity() == 4);
    CHECK(back.dim() == 2);
    for (std::size_t c = 0; c < 3; ++c) {
        REQUIRE(back.queue(c).size() == bank.queue(c).size());
        for (std::size_t i = 0; i < bank.queue(c).size(); ++i) {
            CHECK(back.queue(c)[i] == bank.queue(c)[i]);
        }
    }
}

TEST_CASE("class-average initialization pools each queue then maps it") {
    MemoryBank bank(2, 8, 2);
    bank.push(0, {{1.0, 3.0}, {3.0, 5.0}});  // average (2, 4)
    bank.push(1, {{10.0, 0.0}});
    emseg::CenterSet c = emseg::scene_agnostic_init(bank, passthrough(2));
    REQUIRE(c.k() == 2);
    CHECK(c.centers(0, 0) == doctest::Approx(2.0));
    CHECK(c.centers(0, 1) == doctest::Approx(4.0));
    CHECK(c.centers(1, 0) == doctest::Approx(10.0));
    CHECK(c.centers(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("class-average initialization reports the starved class") {
    MemoryBank bank(3, 4, 2);
    bank.push(0, {{1.0, 1.0}});
    bank.push(2, {{1.0, 1.0}});
    try {
        (void)emseg::scene_agnostic_init(bank, passthrough(2));
        FAIL("expected EmptyQueueError");
    } catch (const emseg::EmptyQueueError& e) {
        CHECK(e.class_id == 1);
    }
    MemoryBank empty(0, 4, 2);
    CHECK_THROWS_AS((void)emseg::scene_agnostic_init(empty, passthrough(2)), emseg::ConfigError);
    CHECK_THROWS_AS((void)emseg::scene_agnostic_init(bank, passthrough(3)), emseg::ShapeError);
}

TEST_CASE("content-adaptive initialization commutes with row selection") {
    emseg::Rng rng(31);
    FeatureMap map = test_util::gaussian_map(3, 4, 4, rng);
    FfnHead ffn = FfnHead::seeded(4, 8, 4, 5);

    // selecting every pixel then mapping equals mapping then selecting
    emseg::CenterSet all = emseg::scene_adaptive_init(map, ffn, 12);
    FeatureMap pe = emseg::position_embed(map);
    Matrix direct = ffn.apply(emseg::grid_sample(pe, 12).features);
    REQUIRE(all.k() == 12);
    CHECK(emseg::max_abs_diff(all.centers, direct) == 0.0);

    emseg::CenterSet few = emseg::scene_adaptive_init(map, ffn, 5);
    CHECK(few.k() == emseg::grid_sample(pe, 5).k_actual);
    CHECK_THROWS_AS((void)emseg::scene_adaptive_init(map, ffn, 0), emseg::RangeError);
}

TEST_CASE("grid initialization returns seed coordinates with mapped rows") {
    emseg::Rng rng(37);
    FeatureMap map = test_util::gaussian_map(6, 6, 4, rng);
    FfnHead ffn = FfnHead::seeded(4, 8, 4, 13);
    emseg::SuperpixelInit init = emseg::superpixel_init(map, 4, ffn);
    FeatureMap pe = emseg::position_embed(map);
    auto gs = emseg::grid_sample(pe, 4);
    REQUIRE(init.k_actual == gs.k_actual);
    REQUIRE(init.coords.size() == gs.coords.size());
    for (std::size_t i = 0; i < gs.coords.size(); ++i) {
        CHECK(init.coords[i].y == gs.coords[i].y);
        CHECK(init.coords[i].x == gs.coords[i].x);
    }
    CHECK(emseg::max_abs_diff(init.centers.centers, ffn.apply(gs.features)) == 0.0);
}

TEST_CASE("panoptic initialization stacks class and content rows") {
    emseg::Rng rng(41);
    FeatureMap map = test_util::gaussian_map(4, 4, 4, rng);
    MemoryBank bank(2, 4, 4);
    bank.push(0, {{1.0, 0.0, 0.0, 0.0}});
    bank.push(1, {{0.0, 1.0, 0.0, 0.0}});
    FfnHead stuff = passthrough(4);
    FfnHead thing = FfnHead::seeded(4, 8, 4, 3);

    emseg::PanopticInit pan = emseg::panoptic_init(bank, map, stuff, thing, 4);
    CHECK(pan.stuff_rows == 2);
    CHECK(pan.thing_rows == emseg::grid_sample(emseg::position_embed(map), 4).k_actual);
    REQUIRE(pan.centers.k() == pan.stuff_rows + pan.thing_rows);
    CHECK(pan.centers.centers(0, 0) == doctest::Approx(1.0));

    emseg::PanopticInit stuff_only = emseg::panoptic_init(bank, map, stuff, thing, 0);
    CHECK(stuff_only.thing_rows == 0);
    MemoryBank none(0, 4, 4);
    emseg::PanopticInit thing_only = emseg::panoptic_init(none, map, stuff, thing, 4);
    CHECK(thing_only.stuff_rows == 0);
    CHECK_THROWS_AS((void)emseg::panoptic_init(none, map, stuff, thing, 0), emseg::ConfigError);
}
