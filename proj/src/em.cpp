#include "emseg/em.hpp"

#include <cmath>
#include <string>

#include "emseg/error.hpp"
#include "emseg/rng.hpp"

namespace emseg {

namespace {

void require_dims(const CenterSet& c, const Matrix& x, const char* who) {
    if (c.dim() != x.cols()) {
        throw ShapeError(std::string(who) + ": centers " + std::to_string(c.k()) + "x" +
                         std::to_string(c.dim()) + " vs points " + std::to_string(x.rows()) +
                         "x" + std::to_string(x.cols()));
    }
    if (c.k() == 0 || x.rows() == 0) {
        throw ShapeError(std::string(who) + ": empty centers or point set");
    }
}

// one-hot nearest-center assignment (squared Euclidean, ties -> lowest index)
AssignmentMatrix nearest_assign(const CenterSet& c, const Matrix& x,
                                std::vector<std::size_t>& labels) {
    const std::size_t k = c.k(), n = x.rows(), d = c.dim();
    AssignmentMatrix out;
    out.probs = Matrix(k, n);
    out.hard = true;
    labels.assign(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        double best = 0.0;
        std::size_t best_k = 0;
        for (std::size_t ki = 0; ki < k; ++ki) {
            double dist = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double diff = c.centers(ki, j) - x(p, j);
                dist += diff * diff;
            }
            if (ki == 0 || dist < best) {
                best = dist;
                best_k = ki;
            }
        }
        labels[p] = best_k;
        out.probs(best_k, p) = 1.0;
    }
    return out;
}

// soft companion of the nearest-center rule: softmax over c·x - |c|^2/2,
// a monotone transform of -|x-c|^2/2, so argmax matches nearest_assign
AssignmentMatrix norm_corrected_soft(const CenterSet& c, const Matrix& x) {
    Matrix scores = matmul(c.centers, transpose(x));
    for (std::size_t ki = 0; ki < c.k(); ++ki) {
        double nrm = 0.0;
        for (std::size_t j = 0; j < c.dim(); ++j) nrm += c.centers(ki, j) * c.centers(ki, j);
        for (std::size_t p = 0; p < x.rows(); ++p) scores(ki, p) -= 0.5 * nrm;
    }
    AssignmentMatrix out;
    out.probs = softmax_axis(scores, Axis::cols);
    out.hard = false;
    return out;
}

// index of the point the soft assignment explains worst (lowest column max)
std::size_t least_explained_point(const AssignmentMatrix& soft) {
    std::size_t worst = 0;
    double worst_max = 2.0;
    for (std::size_t p = 0; p < soft.n(); ++p) {
        double mx = 0.0;
        for (std::size_t ki = 0; ki < soft.k(); ++ki)
            if (soft.probs(ki, p) > mx) mx = soft.probs(ki, p);
        if (mx < worst_max) {
            worst_max = mx;
            worst = p;
        }
    }
    return worst;
}

}  // namespace

CenterSet forgy_init(const Matrix& x, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw RangeError("forgy_init requires k >= 1");
    if (k > x.rows()) {
        throw RangeError("forgy_init: k " + std::to_string(k) + " exceeds point count " +
                         std::to_string(x.rows()));
    }
    Rng rng(seed);
    auto rows = rng.sample_without_replacement(x.rows(), k);
    CenterSet c;
    c.centers = Matrix(k, x.cols());
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) c.centers(i, j) = x(rows[i], j);
    return c;
}

AssignmentMatrix e_step(const CenterSet& c, const Matrix& x) {
    require_dims(c, x, "e_step");
    Matrix scores = matmul(c.centers, transpose(x));
    AssignmentMatrix out;
    out.probs = softmax_axis(scores, Axis::cols);
    out.hard = false;
    return out;
}

CenterSet m_step(const AssignmentMatrix& m, const Matrix& x, CenterUpdate mode) {
    if (m.n() != x.rows()) {
        throw ShapeError("m_step: assignment " + std::to_string(m.k()) + "x" +
                         std::to_string(m.n()) + " vs points " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()));
    }
    CenterSet c;
    c.centers = matmul(m.probs, x);
    if (mode == CenterUpdate::weighted_mean) {
        for (std::size_t ki = 0; ki < m.k(); ++ki) {
            double mass = 0.0;
            for (std::size_t p = 0; p < m.n(); ++p) mass += m.probs(ki, p);
            if (mass == 0.0) throw EmptyClusterError(ki);
            for (std::size_t j = 0; j < x.cols(); ++j) c.centers(ki, j) /= mass;
        }
    }
    return c;
}

AssignmentMatrix hard_assign(const AssignmentMatrix& soft) {
    AssignmentMatrix out;
    out.probs = Matrix(soft.k(), soft.n());
    out.hard = true;
    for (std::size_t p = 0; p < soft.n(); ++p) {
        std::size_t best = 0;
        for (std::size_t ki = 1; ki < soft.k(); ++ki)
            if (soft.probs(ki, p) > soft.probs(best, p)) best = ki;
        out.probs(best, p) = 1.0;
    }
    return out;
}

double objective(const AssignmentMatrix& hard, const CenterSet& c, const Matrix& x) {
    if (!hard.hard) throw ConfigError("objective requires a hard assignment");
    require_dims(c, x, "objective");
    if (hard.k() != c.k() || hard.n() != x.rows()) {
        throw ShapeError("objective: assignment " + std::to_string(hard.k()) + "x" +
                         std::to_string(hard.n()) + " vs centers " + std::to_string(c.k()) +
                         " and points " + std::to_string(x.rows()));
    }
    double total = 0.0;
    for (std::size_t p = 0; p < hard.n(); ++p) {
        for (std::size_t ki = 0; ki < hard.k(); ++ki) {
            if (hard.probs(ki, p) == 1.0) {
                double dot = 0.0;
                for (std::size_t j = 0; j < x.cols(); ++j) dot += c.centers(ki, j) * x(p, j);
                total += dot;
                break;
            }
        }
    }
    return total;
}

ClusterResult em_cluster(const Matrix& x, const CenterSet& init, const EmOptions& opts) {
    require_dims(init, x, "em_cluster");
    const std::size_t k = init.k(), n = x.rows(), d = x.cols();

    ClusterResult res;
    res.centers = init;
    for (std::size_t t = 0; t < opts.t_max; ++t) {
        CenterSet next;
        if (opts.mode == CenterUpdate::sum) {
            res.soft = e_step(res.centers, x);
            res.hard = hard_assign(res.soft);
            next = m_step(res.soft, x, CenterUpdate::sum);
        } else {
            res.soft = norm_corrected_soft(res.centers, x);
            std::vector<std::size_t> labels;
            res.hard = nearest_assign(res.centers, x, labels);
            std::vector<double> mass(k, 0.0);
            next.centers = Matrix(k, d);
            for (std::size_t p = 0; p < n; ++p) {
                mass[labels[p]] += 1.0;
                for (std::size_t j = 0; j < d; ++j) next.centers(labels[p], j) += x(p, j);
            }
            for (std::size_t ki = 0; ki < k; ++ki) {
                if (mass[ki] == 0.0) {
                    // re-seed dead clusters to the least-explained point
                    std::size_t p = least_explained_point(res.soft);
                    for (std::size_t j = 0; j < d; ++j) next.centers(ki, j) = x(p, j);
                } else {
                    for (std::size_t j = 0; j < d; ++j) next.centers(ki, j) /= mass[ki];
                }
            }
        }
        res.objective_trace.push_back(objective(res.hard, next, x));
        double delta = max_abs_diff(next.centers, res.centers.centers);
        res.centers = next;
        res.iterations_run = t + 1;
        if (opts.tol > 0.0 && delta < opts.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace emseg
