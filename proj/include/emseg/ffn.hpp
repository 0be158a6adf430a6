#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emseg/matrix.hpp"

namespace emseg {

// two-layer perceptron y = max(0, x*w1 + b1)*w2 + b2, applied row-wise
struct FfnHead {
    Matrix w1;               // d_in x d_hidden
    std::vector<double> b1;  // d_hidden
    Matrix w2;               // d_hidden x d_out
    std::vector<double> b2;  // d_out

    std::size_t in_dim() const { return w1.rows(); }
    std::size_t hidden_dim() const { return w1.cols(); }
    std::size_t out_dim() const { return w2.cols(); }

    // rows x d_in -> rows x d_out; matrix-product multiply-adds are counted
    Matrix apply(const Matrix& rows, FlopCount* flops = nullptr) const;

    static FfnHead zero(std::size_t d_in, std::size_t d_hidden, std::size_t d_out);
    // Gaussian weights with standard deviation 1/sqrt(fan-in), zero biases
    static FfnHead seeded(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                          std::uint64_t seed);
};

}  // namespace emseg
