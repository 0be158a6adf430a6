#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "emseg/color.hpp"
#include "emseg/error.hpp"
#include "emseg/image.hpp"
#include "emseg/rng.hpp"

using emseg::LabelMap;
using emseg::RgbImage;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("img_scratch_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

RgbImage random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    emseg::Rng rng(seed);
    RgbImage img(h, w);
    for (auto& b : img.data) b = std::uint8_t(rng.below(256));
    return img;
}

}  // namespace

TEST_CASE("binary ppm round trip") {
    RgbImage img = random_image(5, 7, 1);
    TempFile f("rt.ppm");
    emseg::save_ppm(img, f.path);
    RgbImage back = emseg::load_ppm(f.path);
    CHECK(back.height == 5);
    CHECK(back.width == 7);
    CHECK(back.data == img.data);
}

TEST_CASE("ppm header parsing accepts comments and catches malformed files") {
    TempFile f("hdr.ppm");
    write_bytes(f.path, "P6 # inline comment\n# a header comment\n 2 1\n255\n" +
                            std::string("abcdef", 6));
    RgbImage img = emseg::load_ppm(f.path);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.at(0, 0, 0) == 'a');
    CHECK(img.at(0, 1, 2) == 'f');

    write_bytes(f.path, "P5\n2 1\n255\nab");
    CHECK_THROWS_AS((void)emseg::load_ppm(f.path), emseg::ParseError);
    write_bytes(f.path, "P6\n2 1\n65535\n" + std::string(12, 'x'));
    CHECK_THROWS_AS((void)emseg::load_ppm(f.path), emseg::ParseError);
    write_bytes(f.path, "P6\n2 2\n255\nabc");
    CHECK_THROWS_AS((void)emseg::load_ppm(f.path), emseg::ParseError);
    write_bytes(f.path, "P6\n0 2\n255\n");
    CHECK_THROWS_AS((void)emseg::load_ppm(f.path), emseg::ParseError);
    CHECK_THROWS_AS((void)emseg::load_ppm("does_not_exist.ppm"), emseg::Error);
}

TEST_CASE("png round trip and extension dispatch") {
    RgbImage img = random_image(9, 4, 2);
    TempFile f("rt.png");
    emseg::save_png(img, f.path);
    RgbImage back = emseg::load_png(f.path);
    CHECK(back.height == 9);
    CHECK(back.width == 4);
    CHECK(back.data == img.data);

    RgbImage via = emseg::load_image(f.path);
    CHECK(via.data == img.data);
    CHECK_THROWS_AS((void)emseg::load_image("picture.bmp"), emseg::ConfigError);
    CHECK_THROWS_AS((void)emseg::save_image(img, "picture.bmp"), emseg::ConfigError);

    TempFile junk("junk.png");
    write_bytes(junk.path, "definitely not a png");
    CHECK_THROWS_AS((void)emseg::load_png(junk.path), emseg::ParseError);
}

TEST_CASE("label pgm round trip including the single-label corner") {
    LabelMap map(2, 3);
    map.at(0, 0) = 0; map.at(0, 1) = 1; map.at(0, 2) = 2;
    map.at(1, 0) = 2; map.at(1, 1) = 1; map.at(1, 2) = 0;
    TempFile f("labels.pgm");
    emseg::save_label_pgm(map, f.path);
    LabelMap back = emseg::load_label_pgm(f.path);
    CHECK(back.height == 2);
    CHECK(back.width == 3);
    CHECK(back.labels == map.labels);
    CHECK(back.label_count() == 3);

    LabelMap flat(2, 2);  // every label 0 -> maxval 0 on disk
    emseg::save_label_pgm(flat, f.path);
    LabelMap flat_back = emseg::load_label_pgm(f.path);
    CHECK(flat_back.labels == flat.labels);

    LabelMap neg(1, 1);
    neg.at(0, 0) = -1;
    CHECK_THROWS_AS(emseg::save_label_pgm(neg, f.path), emseg::RangeError);
}

TEST_CASE("binary pgm variants parse") {
    TempFile f("bin.pgm");
    write_bytes(f.path, std::string("P5\n2 2\n255\n") + '\x01' + '\x02' + '\x03' + '\x04');
    LabelMap map = emseg::load_label_pgm(f.path);
    CHECK(map.at(0, 0) == 1);
    CHECK(map.at(1, 1) == 4);

    // two-byte big-endian samples once maxval exceeds 255
    std::string wide = "P5\n1 2\n300\n";
    wide += '\x01'; wide += '\x2c';  // 300
    wide += '\x00'; wide += '\x07';  // 7
    write_bytes(f.path, wide);
    LabelMap wmap = emseg::load_label_pgm(f.path);
    CHECK(wmap.at(0, 0) == 300);
    CHECK(wmap.at(1, 0) == 7);

    write_bytes(f.path, "P2\n2 1\n5\n3 9\n");  // sample above maxval
    CHECK_THROWS_AS((void)emseg::load_label_pgm(f.path), emseg::ParseError);
    write_bytes(f.path, "P3\n1 1\n1\n0\n");
    CHECK_THROWS_AS((void)emseg::load_label_pgm(f.path), emseg::ParseError);
}

TEST_CASE("boundary overlay paints 4-neighbor label changes red") {
    RgbImage img(2, 2);
    for (auto& b : img.data) b = 9;
    LabelMap vertical(2, 2);
    vertical.at(0, 1) = 1;
    vertical.at(1, 1) = 1;
    RgbImage over = emseg::boundary_overlay(img, vertical);
    for (std::size_t y = 0; y < 2; ++y) {
        for (std::size_t x = 0; x < 2; ++x) {
            CHECK(over.at(y, x, 0) == 255);
            CHECK(over.at(y, x, 1) == 0);
            CHECK(over.at(y, x, 2) == 0);
        }
    }
    LabelMap flat(2, 2);
    RgbImage same = emseg::boundary_overlay(img, flat);
    CHECK(same.data == img.data);
    LabelMap wrong(3, 2);
    CHECK_THROWS_AS((void)emseg::boundary_overlay(img, wrong), emseg::ShapeError);
}

TEST_CASE("srgb to lab matches the frozen reference values") {
    struct Case {
        std::uint8_t r, g, b;
        double lab[3];
    };
    const Case cases[] = {
        {255, 0, 0, {53.2407941413, 80.0924595964, 67.2031965159}},
        {0, 255, 0, {87.7347223528, -86.1827164205, 83.1793205027}},
        {0, 0, 255, {32.2970109329, 79.1875198451, -107.860161754}},
        {255, 255, 255, {100.000003867, -1.66666661583e-05, 6.66666646332e-06}},
        {0, 0, 0, {0.0, 0.0, 0.0}},
        {128, 128, 128, {53.5850157717, -9.99784638411e-06, 3.99913855365e-06}},
        {100, 150, 200, {60.5072148595, -2.78706950602, -30.9306498696}},
    };
    for (const Case& c : cases) {
        auto lab = emseg::rgb_to_lab(c.r, c.g, c.b);
        for (int i = 0; i < 3; ++i) {
            CHECK(lab[std::size_t(i)] == doctest::Approx(c.lab[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("lab map conversion matches per-pixel conversion") {
    RgbImage img = random_image(3, 4, 5);
    emseg::FeatureMap lab = emseg::rgb_to_lab_map(img);
    REQUIRE(lab.dim == 3);
    for (std::size_t y = 0; y < 3; ++y) {
        for (std::size_t x = 0; x < 4; ++x) {
            auto ref = emseg::rgb_to_lab(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
            for (std::size_t c = 0; c < 3; ++c) CHECK(lab.at(y, x, c) == ref[c]);
        }
    }
}
