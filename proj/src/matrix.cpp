#include "emseg/matrix.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "emseg/error.hpp"

namespace emseg {

namespace {

std::uint64_t g_softmax_audits = 0;

std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

// every normalized slice must sum to 1 up to accumulated rounding
void audit_slice_sum(double sum, std::size_t slice_len) {
    double tol = 8.0 * double(slice_len) * std::numeric_limits<double>::epsilon();
    if (tol < 1e-12) tol = 1e-12;
    if (!(std::abs(sum - 1.0) <= tol)) {
        throw std::logic_error("softmax slice sums to " + std::to_string(sum));
    }
    ++g_softmax_audits;
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b, FlopCount* flops) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul shape mismatch: " + shape_str(a.rows(), a.cols()) + " * " +
                         shape_str(b.rows(), b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t inner = a.cols(), cols = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* orow = out.row_ptr(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double av = a(i, k);
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < cols; ++j) orow[j] += av * brow[j];
        }
    }
    if (flops) *flops += FlopCount(a.rows()) * inner * cols;
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("add shape mismatch: " + shape_str(a.rows(), a.cols()) + " vs " +
                         shape_str(b.rows(), b.cols()));
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("subtract shape mismatch: " + shape_str(a.rows(), a.cols()) + " vs " +
                         shape_str(b.rows(), b.cols()));
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Matrix scale(const Matrix& m, double s) {
    Matrix out = m;
    for (double& v : out.data()) v *= s;
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_abs_diff shape mismatch: " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::abs(a.data()[i] - b.data()[i]);
        if (d > worst) worst = d;
    }
    return worst;
}

double max_abs(const Matrix& m) {
    double worst = 0.0;
    for (double v : m.data()) {
        double d = std::abs(v);
        if (d > worst) worst = d;
    }
    return worst;
}

Matrix softmax_axis(const Matrix& m, Axis axis) {
    if (m.rows() == 0 || m.cols() == 0) {
        throw ShapeError("softmax_axis on empty matrix " + shape_str(m.rows(), m.cols()));
    }
    Matrix out(m.rows(), m.cols());
    if (axis == Axis::cols) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            double mx = m(0, c);
            for (std::size_t r = 1; r < m.rows(); ++r)
                if (m(r, c) > mx) mx = m(r, c);
            double sum = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                double e = std::exp(m(r, c) - mx);
                out(r, c) = e;
                sum += e;
            }
            double check = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                out(r, c) /= sum;
                check += out(r, c);
            }
            audit_slice_sum(check, m.rows());
        }
    } else {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const double* in = m.row_ptr(r);
            double* o = out.row_ptr(r);
            double mx = in[0];
            for (std::size_t c = 1; c < m.cols(); ++c)
                if (in[c] > mx) mx = in[c];
            double sum = 0.0;
            for (std::size_t c = 0; c < m.cols(); ++c) {
                o[c] = std::exp(in[c] - mx);
                sum += o[c];
            }
            double check = 0.0;
            for (std::size_t c = 0; c < m.cols(); ++c) {
                o[c] /= sum;
                check += o[c];
            }
            audit_slice_sum(check, m.cols());
        }
    }
    return out;
}

std::uint64_t softmax_audit_count() { return g_softmax_audits; }

std::vector<double> avg_pool(const std::vector<std::vector<double>>& vectors) {
    if (vectors.empty()) throw RangeError("avg_pool on an empty list");
    const std::size_t d = vectors.front().size();
    std::vector<double> out(d, 0.0);
    for (const auto& v : vectors) {
        if (v.size() != d) {
            throw ShapeError("avg_pool width mismatch: " + std::to_string(v.size()) + " vs " +
                             std::to_string(d));
        }
        for (std::size_t i = 0; i < d; ++i) out[i] += v[i];
    }
    for (double& v : out) v /= double(vectors.size());
    return out;
}

}  // namespace emseg
