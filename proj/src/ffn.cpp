#include "emseg/ffn.hpp"

#include <cmath>
#include <string>

#include "emseg/error.hpp"
#include "emseg/rng.hpp"

namespace emseg {

Matrix FfnHead::apply(const Matrix& rows, FlopCount* flops) const {
    if (rows.cols() != in_dim()) {
        throw ShapeError("FfnHead::apply: input width " + std::to_string(rows.cols()) +
                         " vs expected " + std::to_string(in_dim()));
    }
    if (w2.rows() != hidden_dim() || b1.size() != hidden_dim() || b2.size() != out_dim()) {
        throw ShapeError("FfnHead::apply: inconsistent layer shapes");
    }
    Matrix hidden = matmul(rows, w1, flops);
    for (std::size_t r = 0; r < hidden.rows(); ++r) {
        for (std::size_t c = 0; c < hidden.cols(); ++c) {
            double v = hidden(r, c) + b1[c];
            hidden(r, c) = v > 0.0 ? v : 0.0;
        }
    }
    Matrix out = matmul(hidden, w2, flops);
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b2[c];
    return out;
}

FfnHead FfnHead::zero(std::size_t d_in, std::size_t d_hidden, std::size_t d_out) {
    FfnHead f;
    f.w1 = Matrix(d_in, d_hidden);
    f.b1.assign(d_hidden, 0.0);
    f.w2 = Matrix(d_hidden, d_out);
    f.b2.assign(d_out, 0.0);
    return f;
}

FfnHead FfnHead::seeded(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                        std::uint64_t seed) {
    FfnHead f = zero(d_in, d_hidden, d_out);
    Rng rng(seed);
    double s1 = 1.0 / std::sqrt(double(d_in));
    for (double& v : f.w1.data()) v = rng.gaussian() * s1;
    double s2 = 1.0 / std::sqrt(double(d_hidden));
    for (double& v : f.w2.data()) v = rng.gaussian() * s2;
    return f;
}

}  // namespace emseg
