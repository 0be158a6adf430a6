#include "emseg/rng.hpp"

#include <cmath>
#include <numbers>

#include "emseg/error.hpp"

namespace emseg {

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw RangeError("Rng::below requires n >= 1");
    // rejection sampling over the largest multiple of n keeps the draw unbiased
    std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

double Rng::uniform01() {
    return double(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) {
        throw RangeError("cannot sample " + std::to_string(k) + " distinct indices from " +
                         std::to_string(n));
    }
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + std::size_t(below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace emseg
