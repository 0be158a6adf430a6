#include <string>
#include <utility>
#include <vector>

#include "emseg/attention.hpp"
#include "emseg/error.hpp"

namespace emseg {

// Reverse-mode gradients through the recurrent attention loop. The forward
// pass stores, per round, the input centers, projected queries and the
// normalized assignment; the backward pass walks the rounds in reverse and
// accumulates into the shared projections.
RcaGradients rca_gradient(const CenterSet& c0, const FeatureMap& i, const AttentionParams& p,
                          std::size_t t, const Matrix& upstream) {
    if (p.heads != 1) throw ConfigError("rca_gradient supports heads == 1 only");
    if (t == 0) throw RangeError("rca_gradient requires t >= 1");
    const std::size_t k = c0.k(), d = c0.dim();
    if (upstream.rows() != k || upstream.cols() != d) {
        throw ShapeError("rca_gradient: upstream is " + std::to_string(upstream.rows()) + "x" +
                         std::to_string(upstream.cols()) + ", expected " + std::to_string(k) +
                         "x" + std::to_string(d));
    }

    Matrix x = i.to_matrix();
    Matrix kp = matmul(x, p.w_k);
    Matrix vp = matmul(x, p.w_v);

    std::vector<Matrix> c_in, q_at, m_at;  // per round
    c_in.reserve(t);
    q_at.reserve(t);
    m_at.reserve(t);
    Matrix c = c0.centers;
    for (std::size_t s = 0; s < t; ++s) {
        Matrix q = matmul(c, p.w_q);
        Matrix m = softmax_axis(matmul(q, transpose(kp)), Axis::cols);
        Matrix next = matmul(m, vp);
        c_in.push_back(std::move(c));
        q_at.push_back(std::move(q));
        m_at.push_back(std::move(m));
        c = std::move(next);
    }

    const std::size_t hw = x.rows();
    Matrix d_c = upstream;
    Matrix d_kp(hw, d), d_vp(hw, d);
    RcaGradients g;
    g.d_w_q = Matrix(d, d);
    for (std::size_t si = t; si-- > 0;) {
        const Matrix& m = m_at[si];
        Matrix d_m = matmul(d_c, transpose(vp));
        d_vp = add(d_vp, matmul(transpose(m), d_c));
        // column softmax backward: dS(i,j) = M(i,j) * (dM(i,j) - sum_l dM(l,j) M(l,j))
        Matrix d_s(k, hw);
        for (std::size_t j = 0; j < hw; ++j) {
            double dot = 0.0;
            for (std::size_t r = 0; r < k; ++r) dot += d_m(r, j) * m(r, j);
            for (std::size_t r = 0; r < k; ++r) d_s(r, j) = m(r, j) * (d_m(r, j) - dot);
        }
        Matrix d_q = matmul(d_s, kp);
        d_kp = add(d_kp, matmul(transpose(d_s), q_at[si]));
        g.d_w_q = add(g.d_w_q, matmul(transpose(c_in[si]), d_q));
        d_c = matmul(d_q, transpose(p.w_q));
    }
    g.d_c0 = std::move(d_c);
    g.d_w_k = matmul(transpose(x), d_kp);
    g.d_w_v = matmul(transpose(x), d_vp);
    g.d_features = add(matmul(d_kp, transpose(p.w_k)), matmul(d_vp, transpose(p.w_v)));
    return g;
}

}  // namespace emseg
