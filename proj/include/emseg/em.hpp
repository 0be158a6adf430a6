#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emseg/matrix.hpp"

namespace emseg {

// k x n column-stochastic assignment; hard means every column is one-hot
struct AssignmentMatrix {
    Matrix probs;
    bool hard = false;

    std::size_t k() const { return probs.rows(); }
    std::size_t n() const { return probs.cols(); }
};

// k x d stack of cluster centers, one row per cluster
struct CenterSet {
    Matrix centers;

    std::size_t k() const { return centers.rows(); }
    std::size_t dim() const { return centers.cols(); }
};

// sum: centers are the literal assignment-weighted sums M·X (unnormalized);
// weighted_mean: row k of M·X divided by the assignment mass of cluster k
enum class CenterUpdate { sum, weighted_mean };

struct ClusterResult {
    CenterSet centers;
    AssignmentMatrix soft;  // responsibilities computed in the final iteration
    AssignmentMatrix hard;  // assignment adopted by the final center update
    std::vector<double> objective_trace;  // one post-update value per iteration
    bool converged = false;
    std::size_t iterations_run = 0;
};

struct EmOptions {
    std::size_t t_max = 100;
    double tol = 1e-9;  // tol <= 0 disables the early stop
    CenterUpdate mode = CenterUpdate::weighted_mean;
};

// k distinct data rows chosen by a seeded draw without replacement
CenterSet forgy_init(const Matrix& x, std::size_t k, std::uint64_t seed);

// soft responsibilities: column-wise softmax of the center/point dot products
AssignmentMatrix e_step(const CenterSet& c, const Matrix& x);

// center update from an assignment; weighted_mean errors on zero-mass clusters
CenterSet m_step(const AssignmentMatrix& m, const Matrix& x, CenterUpdate mode);

// one-hot argmax per column; ties go to the lowest cluster index
AssignmentMatrix hard_assign(const AssignmentMatrix& soft);

// Tr(M^T C X^T) for a hard assignment: the summed similarity of every point
// to its assigned center. Soft input is a contract violation.
double objective(const AssignmentMatrix& hard, const CenterSet& c, const Matrix& x);

// Alternating assignment/update refinement of the initial centers.
//
// weighted_mean mode runs the classical descent: points are hard-assigned to
// the nearest center (ties -> lowest index), centers move to the mean of
// their members, and clusters left empty are re-seeded to the point with the
// lowest max responsibility. The recorded objective (post-update, with the
// assignment that produced the update) is non-decreasing. The reported soft
// responsibilities use center-norm-corrected scores (c·x - |c|^2/2, a
// monotone transform of -|x-c|^2/2), so their per-point argmax agrees with
// the hard labels.
//
// sum mode updates centers with the soft responsibilities literally
// (C = M·X, soft = e_step's raw-dot softmax); the trace is recorded via
// hard_assign with no monotonicity claim. Convergence: max |delta C| < tol.
//
// Both modes satisfy hard == hard_assign(soft) away from floating-point
// knife-edge ties.
ClusterResult em_cluster(const Matrix& x, const CenterSet& init, const EmOptions& opts);

}  // namespace emseg
