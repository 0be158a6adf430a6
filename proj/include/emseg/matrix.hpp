#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace emseg {

// running count of fused multiply-add operations
using FlopCount = std::uint64_t;

enum class Axis { rows, cols };

// dense row-major matrix of 64-bit floats
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// a · b; when flops is given, rows·inner·cols multiply-adds are accumulated
Matrix matmul(const Matrix& a, const Matrix& b, FlopCount* flops = nullptr);

Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& m);

// Numerically stabilized softmax. Every slice along `axis` sums to 1:
// Axis::cols normalizes each column, Axis::rows each row. Each normalized
// slice is audited to sum to 1 within rounding (see softmax_audit_count).
Matrix softmax_axis(const Matrix& m, Axis axis);

// number of softmax slices audited since process start (test support)
std::uint64_t softmax_audit_count();

// element-wise mean of equally sized vectors; empty input is an error
std::vector<double> avg_pool(const std::vector<std::vector<double>>& vectors);

}  // namespace emseg
