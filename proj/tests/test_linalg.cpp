#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "emseg/error.hpp"
#include "emseg/feature_map.hpp"
#include "emseg/matrix.hpp"
#include "emseg/rng.hpp"
#include "helpers.hpp"

using emseg::Axis;
using emseg::FeatureMap;
using emseg::FlopCount;
using emseg::Matrix;

TEST_CASE("matmul hand case and flop accounting") {
    Matrix a(2, 2), b(2, 2);
    a(0, 0) = 1; a(0, 1) = 2; a(1, 0) = 3; a(1, 1) = 4;
    b(0, 0) = 5; b(0, 1) = 6; b(1, 0) = 7; b(1, 1) = 8;
    FlopCount flops = 0;
    Matrix c = emseg::matmul(a, b, &flops);
    CHECK(c(0, 0) == 19);
    CHECK(c(0, 1) == 22);
    CHECK(c(1, 0) == 43);
    CHECK(c(1, 1) == 50);
    CHECK(flops == 8);  // 2*2*2 multiply-adds

    Matrix i3 = Matrix::identity(3);
    CHECK(i3(0, 0) == 1.0);
    CHECK(i3(0, 1) == 0.0);
    Matrix bad(3, 2);
    CHECK_THROWS_AS((void)emseg::matmul(a, bad), emseg::ShapeError);
}

TEST_CASE("matmul with identity is exact") {
    emseg::Rng rng(42);
    Matrix m = test_util::gaussian_matrix(5, 7, rng);
    Matrix left = emseg::matmul(Matrix::identity(5), m);
    Matrix right = emseg::matmul(m, Matrix::identity(7));
    CHECK(emseg::max_abs_diff(left, m) == 0.0);
    CHECK(emseg::max_abs_diff(right, m) == 0.0);
}

TEST_CASE("elementwise helpers") {
    Matrix a(1, 3), b(1, 3);
    for (std::size_t c = 0; c < 3; ++c) {
        a(0, c) = double(c) + 1.0;
        b(0, c) = 10.0 * double(c);
    }
    Matrix s = emseg::add(a, b);
    CHECK(s(0, 2) == 23.0);
    Matrix d = emseg::subtract(b, a);
    CHECK(d(0, 0) == -1.0);
    Matrix sc = emseg::scale(a, 2.0);
    CHECK(sc(0, 1) == 4.0);
    CHECK(emseg::max_abs_diff(a, b) == 20.0 - 3.0);
    CHECK(emseg::max_abs(d) == 17.0);
    Matrix t = emseg::transpose(a);
    CHECK(t.rows() == 3);
    CHECK(t(2, 0) == 3.0);
    Matrix wrong(2, 2);
    CHECK_THROWS_AS((void)emseg::add(a, wrong), emseg::ShapeError);
}

TEST_CASE("column softmax matches the frozen reference") {
    Matrix m(3, 1);
    m(0, 0) = 1.0; m(1, 0) = 2.0; m(2, 0) = 3.0;
    Matrix p = emseg::softmax_axis(m, Axis::cols);
    CHECK(p(0, 0) == doctest::Approx(0.090030573170380462).epsilon(1e-14));
    CHECK(p(1, 0) == doctest::Approx(0.24472847105479764).epsilon(1e-14));
    CHECK(p(2, 0) == doctest::Approx(0.66524095577482178).epsilon(1e-14));

    Matrix r = emseg::softmax_axis(emseg::transpose(m), Axis::rows);
    CHECK(r(0, 0) == p(0, 0));
    CHECK(r(0, 2) == p(2, 0));
}

TEST_CASE("softmax slices sum to one even with extreme logits") {
    emseg::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix m = test_util::gaussian_matrix(4, 6, rng);
        for (double& v : m.data()) v *= 400.0;  // large spread, must stay finite
        Matrix p = emseg::softmax_axis(m, Axis::cols);
        for (std::size_t j = 0; j < p.cols(); ++j) {
            double sum = 0.0;
            for (std::size_t i = 0; i < p.rows(); ++i) {
                CHECK(std::isfinite(p(i, j)));
                CHECK(p(i, j) >= 0.0);
                sum += p(i, j);
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("softmax audit counter advances per normalized slice") {
    const std::uint64_t before = emseg::softmax_audit_count();
    Matrix m(3, 4, 0.25);
    (void)emseg::softmax_axis(m, Axis::cols);
    CHECK(emseg::softmax_audit_count() == before + 4);
    (void)emseg::softmax_axis(m, Axis::rows);
    CHECK(emseg::softmax_audit_count() == before + 4 + 3);
}

TEST_CASE("equal logits give a uniform distribution") {
    Matrix m(5, 2, 3.25);
    Matrix p = emseg::softmax_axis(m, Axis::cols);
    for (std::size_t i = 0; i < 5; ++i) CHECK(p(i, 0) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("avg_pool") {
    std::vector<std::vector<double>> rows = {{1.0, 2.0}, {3.0, 6.0}};
    auto avg = emseg::avg_pool(rows);
    CHECK(avg[0] == 2.0);
    CHECK(avg[1] == 4.0);
    CHECK_THROWS_AS((void)emseg::avg_pool({}), emseg::RangeError);
    CHECK_THROWS_AS((void)emseg::avg_pool({{1.0}, {1.0, 2.0}}), emseg::ShapeError);
}

TEST_CASE("rng determinism and ranges") {
    emseg::Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    emseg::Rng r(5);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("gaussian moments") {
    emseg::Rng r(99);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = r.gaussian();
        sum += g;
        sq += g * g;
    }
    const double mean = sum / n, var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("sampling without replacement") {
    emseg::Rng r(11);
    auto pick = r.sample_without_replacement(10, 4);
    CHECK(pick.size() == 4);
    std::set<std::size_t> s(pick.begin(), pick.end());
    CHECK(s.size() == 4);
    for (std::size_t v : pick) CHECK(v < 10);

    auto all = r.sample_without_replacement(6, 6);
    std::set<std::size_t> full(all.begin(), all.end());
    CHECK(full.size() == 6);
    CHECK(*full.begin() == 0);
    CHECK(*full.rbegin() == 5);
}

TEST_CASE("feature map matrix round trip") {
    emseg::Rng rng(3);
    FeatureMap map = test_util::gaussian_map(3, 4, 2, rng);
    Matrix m = map.to_matrix();
    CHECK(m.rows() == 12);
    CHECK(m(1 * 4 + 2, 1) == map.at(1, 2, 1));
    FeatureMap back = FeatureMap::from_matrix(3, 4, m);
    CHECK(back.data == map.data);
    CHECK_THROWS_AS((void)FeatureMap::from_matrix(2, 4, m), emseg::ShapeError);
}

TEST_CASE("position embedding matches the frozen table") {
    FeatureMap zeros(2, 3, 8);
    FeatureMap pe = emseg::position_embed(zeros);
    const double expect[8] = {0.90929742682568171, -0.41614683654714241, 0.01999866669333308,
                              0.99980000666657776, 0.8414709848078965, 0.54030230586813977,
                              0.0099998333341666645, 0.99995000041666526};
    for (std::size_t c = 0; c < 8; ++c) {
        CHECK(pe.at(1, 2, c) == doctest::Approx(expect[c]).epsilon(1e-14));
    }
    // origin: sin(0)=0 on even channels, cos(0)=1 on odd channels
    for (std::size_t c = 0; c < 8; ++c) {
        CHECK(pe.at(0, 0, c) == doctest::Approx(c % 2 == 0 ? 0.0 : 1.0));
    }
}

TEST_CASE("position embedding is additive and rejects odd dims") {
    FeatureMap base(2, 2, 4, 0.5);
    FeatureMap zeros(2, 2, 4);
    FeatureMap pe0 = emseg::position_embed(zeros);
    FeatureMap pe = emseg::position_embed(base);
    for (std::size_t i = 0; i < pe.data.size(); ++i) {
        CHECK(pe.data[i] == doctest::Approx(0.5 + pe0.data[i]).epsilon(1e-15));
    }
    FeatureMap odd(2, 2, 3);
    CHECK_THROWS_AS((void)emseg::position_embed(odd), emseg::ConfigError);
}

TEST_CASE("grid sampling picks cell-center pixels") {
    emseg::Rng rng(4);
    FeatureMap map = test_util::gaussian_map(5, 7, 2, rng);
    auto gs = emseg::grid_sample(map, 6);
    REQUIRE(gs.k_actual == 4);  // 2x2 grid from floor(side * sqrt(6/35))
    const std::size_t ys[4] = {1, 1, 3, 3};
    const std::size_t xs[4] = {1, 5, 1, 5};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(gs.coords[i].y == ys[i]);
        CHECK(gs.coords[i].x == xs[i]);
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(gs.features(i, c) == map.at(ys[i], xs[i], c));
        }
    }
}

TEST_CASE("grid sampling at k = HW selects every pixel in order") {
    emseg::Rng rng(8);
    FeatureMap map = test_util::gaussian_map(5, 7, 3, rng);
    auto gs = emseg::grid_sample(map, 35);
    REQUIRE(gs.k_actual == 35);
    for (std::size_t i = 0; i < 35; ++i) {
        CHECK(gs.coords[i].y == i / 7);
        CHECK(gs.coords[i].x == i % 7);
    }
    CHECK(emseg::max_abs_diff(gs.features, map.to_matrix()) == 0.0);
}

TEST_CASE("grid sampling rejects out-of-range k") {
    FeatureMap map(4, 4, 1);
    CHECK_THROWS_AS((void)emseg::grid_sample(map, 0), emseg::RangeError);
    CHECK_THROWS_AS((void)emseg::grid_sample(map, 17), emseg::RangeError);
}
