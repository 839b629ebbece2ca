#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "omr/matrix.hpp"
#include "omr/problem.hpp"
#include "omr/sdp.hpp"

namespace omr {

struct GradOptions {
    int max_iter = 20000;
    double tol = 1e-10;        // relative objective-decrease stop
    bool acceleration = true;  // FISTA momentum (monotone variant)
    bool backtracking = false; // false: fixed step 1/L with L = 2*lambda_max
    std::vector<double>* objective_trace = nullptr;  // accepted objective per iteration
};

namespace detail {

struct FistaResult {
    Mat x;
    double objective = 0.0;
    int iterations = 0;
    double last_decrease = 0.0;
    bool converged = false;
};

/// Monotone projected-gradient descent with optional FISTA momentum.
/// `value_grad(x, grad)` returns f(x) and fills *grad when non-null;
/// `project(x)` maps x onto the feasible set. Momentum is restarted whenever
/// the proximal point fails to descend; a failed plain step means the
/// iterate is stationary.
template <class ValueGrad, class Project>
FistaResult fista_minimize(Mat x0, double lipschitz, const GradOptions& opts,
                           ValueGrad&& value_grad, Project&& project) {
    project(x0);
    Mat x = std::move(x0);
    Mat x_prev = x;
    Mat y = x;
    Mat grad(x.rows(), x.cols());

    double f_x = value_grad(x, nullptr);
    double t = 1.0;
    double step = opts.backtracking ? 10.0 / std::max(lipschitz, 1e-300)
                                    : 1.0 / std::max(lipschitz, 1e-300);
    if (opts.objective_trace) opts.objective_trace->push_back(f_x);

    FistaResult res;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        const double f_y = value_grad(y, &grad);
        Mat z = y - step * grad;
        project(z);
        double f_z = value_grad(z, nullptr);

        if (opts.backtracking) {
            // halve the step until the quadratic upper bound at y holds
            while (f_z > f_y + grad.cwiseProduct(z - y).sum() +
                             (z - y).squaredNorm() / (2.0 * step) + 1e-14 &&
                   step > 1e-3 / std::max(lipschitz, 1e-300)) {
                step *= 0.5;
                z = y - step * grad;
                project(z);
                f_z = value_grad(z, nullptr);
            }
        }

        if (f_z <= f_x + 1e-12 * (1.0 + std::abs(f_x))) {
            const double decrease = f_x - f_z;
            x_prev = std::move(x);
            x = std::move(z);
            res.last_decrease = decrease;
            const bool done = decrease <= opts.tol * (1.0 + std::abs(f_x));
            f_x = f_z;
            if (opts.objective_trace) opts.objective_trace->push_back(f_x);
            if (done) {
                ++iter;
                res.converged = true;
                break;
            }
            if (opts.acceleration) {
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                y = x + ((t - 1.0) / t_next) * (x - x_prev);
                t = t_next;
            } else {
                y = x;
            }
        } else if (opts.acceleration && t > 1.0) {
            // momentum overshot: restart from the best iterate
            t = 1.0;
            y = x;
        } else {
            // plain step failed to descend: numerically stationary
            ++iter;
            res.converged = true;
            break;
        }
    }
    res.x = std::move(x);
    res.objective = f_x;
    res.iterations = iter;
    return res;
}

inline Mat stack_known(const ProblemInstance& inst) {
    Mat xtil(inst.N, (inst.K - 1) * inst.D);
    for (int i = 0; i + 1 < inst.K; ++i) xtil.middleCols(i * inst.D, inst.D) = inst.X[i];
    return xtil;
}

inline OrthogonalSet round_blocks(const Mat& stacked, int count, int d,
                                  std::vector<std::string>& warnings) {
    OrthogonalSet set;
    set.matrices.reserve(count);
    for (int i = 0; i < count; ++i) {
        bool degenerate = false;
        set.matrices.push_back(polar_round(stacked.middleRows(i * d, d), &degenerate));
        if (degenerate)
            warnings.push_back("rounding: rank-deficient block V_" + std::to_string(i + 1));
    }
    return set;
}

}  // namespace detail

/// Unconstrained least squares min ||X_K - sum X_i V_i||_F^2, solved blockwise
/// by one rank-revealing decomposition (minimal-norm solution when rank
/// deficient), then each block rounded to the nearest orthogonal matrix.
inline std::pair<OrthogonalSet, SolverReport> solve_ls(const ProblemInstance& inst) {
    const detail::StopWatch watch;
    const Mat xtil = detail::stack_known(inst);

    Eigen::CompleteOrthogonalDecomposition<Mat> cod(xtil);
    const Mat a = cod.solve(inst.X[inst.K - 1]);

    SolverReport report;
    report.iterations = 1;
    report.converged = true;
    if (cod.rank() < xtil.cols())
        report.warnings.push_back("solve_ls: rank-deficient system, minimal-norm solution");
    report.objective = (xtil * a - inst.X[inst.K - 1]).squaredNorm();

    OrthogonalSet set = detail::round_blocks(a, inst.K - 1, inst.D, report.warnings);
    report.runtime_seconds = watch.seconds();
    return {std::move(set), std::move(report)};
}

/// Constrained least squares (operator-norm unit ball per matrix), solved by
/// projected gradient with the exact per-block spectral clip.
inline std::pair<OrthogonalSet, SolverReport> solve_cls(const ProblemInstance& inst,
                                                        const GradOptions& opts = {}) {
    const detail::StopWatch watch;
    const Mat xtil = detail::stack_known(inst);
    const Mat& xk = inst.X[inst.K - 1];
    const double sigma_max = operator_norm(xtil);
    const double lipschitz = 2.0 * sigma_max * sigma_max;
    const int d = inst.D;
    const int blocks = inst.K - 1;

    auto value_grad = [&](const Mat& a, Mat* grad) {
        const Mat resid = xtil * a - xk;
        if (grad) *grad = 2.0 * xtil.transpose() * resid;
        return resid.squaredNorm();
    };
    auto project = [&](Mat& a) {
        for (int i = 0; i < blocks; ++i)
            a.middleRows(i * d, d) = spectral_ball_project(a.middleRows(i * d, d));
    };

    auto res = detail::fista_minimize(Mat::Zero(blocks * d, d), lipschitz, opts,
                                      value_grad, project);

    SolverReport report;
    report.iterations = res.iterations;
    report.converged = res.converged;
    report.objective = res.objective;
    report.primal_residual = res.last_decrease;
    if (!res.converged)
        report.warnings.push_back("solve_cls: max_iter reached before objective stalled");
    OrthogonalSet set = detail::round_blocks(res.x, blocks, d, report.warnings);
    report.runtime_seconds = watch.seconds();
    return {std::move(set), std::move(report)};
}

namespace detail {

inline void project_block_identity(Mat& m, int K, int D) {
    project_identity_diagonal(m, K, D);
}

inline void project_block_identity_and_ball(Mat& m, int K, int D) {
    m = 0.5 * (m + m.transpose()).eval();
    for (int i = 0; i < K; ++i) {
        m.block(i * D, i * D, D, D) = Mat::Identity(D, D);
        for (int j = i + 1; j < K; ++j) {
            const Mat clipped = spectral_ball_project(m.block(i * D, j * D, D, D));
            m.block(i * D, j * D, D, D) = clipped;
            m.block(j * D, i * D, D, D) = clipped.transpose();
        }
    }
}

/// Shared body of LS+ / C-LS+: minimize tr(C H^2) over symmetric H with
/// identity diagonal blocks, then read V_i = f(-H_{iK}).
template <class Project>
std::pair<OrthogonalSet, SolverReport> solve_quadratic_gram(const ProblemInstance& inst,
                                                            const GradOptions& opts,
                                                            Project&& project,
                                                            const char* name) {
    const StopWatch watch;
    const CostMatrix cost = assemble_cost(inst);
    const int kd = inst.K * inst.D;

    Eigen::SelfAdjointEigenSolver<Mat> es(cost.blocks, Eigen::EigenvaluesOnly);
    const double lipschitz = 2.0 * std::max(es.eigenvalues()(kd - 1), 0.0);

    auto value_grad = [&](const Mat& h, Mat* grad) {
        const Mat m = cost.blocks * h;
        if (grad) *grad = m + m.transpose();
        return m.cwiseProduct(h).sum();  // tr(C H^2) for symmetric H
    };

    auto res = fista_minimize(Mat::Identity(kd, kd), lipschitz, opts, value_grad, project);

    SolverReport report;
    report.iterations = res.iterations;
    report.converged = res.converged;
    report.objective = res.objective;
    report.primal_residual = res.last_decrease;
    if (!res.converged)
        report.warnings.push_back(std::string(name) + ": max_iter reached before objective stalled");

    OrthogonalSet set;
    set.matrices.reserve(inst.K - 1);
    for (int i = 0; i + 1 < inst.K; ++i) {
        bool degenerate = false;
        const Mat block = res.x.block(i * inst.D, (inst.K - 1) * inst.D, inst.D, inst.D);
        set.matrices.push_back(polar_round(-block, &degenerate));
        if (degenerate)
            report.warnings.push_back(std::string(name) + ": rank-deficient rounding for V_" +
                                      std::to_string(i + 1));
    }
    report.runtime_seconds = watch.seconds();
    return {std::move(set), std::move(report)};
}

}  // namespace detail

/// Expanded least squares min tr(C H^2) s.t. H symmetric, H_ii = I.
inline std::pair<OrthogonalSet, SolverReport> solve_lsplus(const ProblemInstance& inst,
                                                           const GradOptions& opts = {}) {
    const int K = inst.K, D = inst.D;
    return detail::solve_quadratic_gram(
        inst, opts, [K, D](Mat& m) { detail::project_block_identity(m, K, D); }, "solve_lsplus");
}

/// LS+ with the additional per-block operator-norm constraint ||H_ij|| <= 1.
inline std::pair<OrthogonalSet, SolverReport> solve_clsplus(const ProblemInstance& inst,
                                                            const GradOptions& opts = {}) {
    const int K = inst.K, D = inst.D;
    return detail::solve_quadratic_gram(
        inst, opts, [K, D](Mat& m) { detail::project_block_identity_and_ball(m, K, D); },
        "solve_clsplus");
}

}  // namespace omr
