#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace emseg {

// Deterministic random source used wherever results must reproduce
// bit-for-bit. Distribution helpers are hand-rolled because the standard
// distribution templates are implementation-defined and would tie outputs
// to one standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // unbiased integer in [0, n); n must be positive
    std::uint64_t below(std::uint64_t n);

    // uniform in [0, 1) with 53 random bits
    double uniform01();

    // standard normal via Box-Muller; the second value of each pair is cached
    double gaussian();

    // k distinct indices from [0, n) by partial Fisher-Yates shuffle
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace emseg
