#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "omr/matrix.hpp"
#include "omr/problem.hpp"

namespace omr {

/// Symmetric KD x KD SDP variable with D x D block structure.
struct BlockGram {
    int K = 0;
    int D = 0;
    Mat H;
};

struct SdpOptions {
    double rho = 1.0;
    int max_iter = 50000;
    // <= 0 means the default tol_factor * (1 + ||C||_F).
    double tol_primal = 0.0;
    double tol_dual = 0.0;
    // scale of the automatic residual tolerances
    double tol_factor = 1e-7;
    bool adaptive_rho = true;
    // safeguarded Anderson acceleration of the splitting fixed point;
    // 0 disables, otherwise the history window
    int anderson_memory = 10;
    // when the splitting lands at a (relatively) zero objective, refine on
    // the exact solution face {H psd, CH = 0}; <= 0 disables
    double zero_objective_tol = 1e-7;
};

struct SolverReport {
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    double runtime_seconds = 0.0;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// H = U U^T factor with D-row blocks U_1..U_K.
struct FactorMatrix {
    int K = 0;
    int D = 0;
    int r = 0;  // factor rank (columns of U)
    Mat U;
};

namespace detail {

inline void project_identity_diagonal(Mat& m, int K, int D) {
    m = 0.5 * (m + m.transpose()).eval();
    for (int i = 0; i < K; ++i) m.block(i * D, i * D, D, D) = Mat::Identity(D, D);
}

inline Mat psd_clip(const Mat& s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
           es.eigenvectors().transpose();
}

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Type-II Anderson extrapolation over a fixed-point history. Candidates are
/// combinations sum theta_i T(s_i) with sum theta_i = 1 minimizing the
/// combined residual; the caller safeguards acceptance.
class AndersonAccelerator {
public:
    explicit AndersonAccelerator(int memory) : memory_(memory) {}

    void reset() {
        s_.clear();
        g_.clear();
    }

    void push(const Vec& s, const Vec& g) {
        s_.push_back(s);
        g_.push_back(g);
        if (static_cast<int>(s_.size()) > memory_) {
            s_.erase(s_.begin());
            g_.erase(g_.begin());
        }
    }

    bool ready() const { return s_.size() >= 2; }

    Vec candidate() const {
        const int m = static_cast<int>(s_.size()) - 1;  // difference columns
        const Vec& g_last = g_.back();
        Mat gram(m, m);
        Vec rhs(m);
        for (int i = 0; i < m; ++i) {
            const Vec di = g_[i + 1] - g_[i];
            rhs(i) = di.dot(g_last);
            for (int j = 0; j <= i; ++j) {
                const double v = di.dot(g_[j + 1] - g_[j]);
                gram(i, j) = v;
                gram(j, i) = v;
            }
        }
        const double reg = 1e-12 * (1.0 + gram.trace());
        const Vec gamma = (gram + reg * Mat::Identity(m, m)).ldlt().solve(rhs);

        Vec out = s_.back() + g_.back();
        for (int i = 0; i < m; ++i)
            out -= gamma(i) * ((s_[i + 1] + g_[i + 1]) - (s_[i] + g_[i]));
        return out;
    }

private:
    int memory_;
    std::vector<Vec> s_;
    std::vector<Vec> g_;
};

}  // namespace detail

/// Splitting solve of  min tr(CH)  s.t.  H PSD, H_ii = I.
///
/// Alternates the exact PSD projection H = P_psd(Z - W - C/rho), the affine
/// projection Z = P_aff(H + W) (symmetrize, reset diagonal blocks to I) and
/// the scaled dual update W += H - Z, run on the equivalent single variable
/// S = H + W. Stops when the primal residual ||H - Z||_F and dual residual
/// rho * ||Z - Z_prev||_F both fall below their tolerances.
///
/// Two refinements are layered on the plain alternation, both keeping every
/// iterate on the exact projection path:
///  - safeguarded Anderson extrapolation of the S history, accepted only
///    when it strictly shrinks the fixed-point residual;
///  - a zero-objective refinement phase. When the alternation lands at a
///    relatively zero objective, the optimal set is exactly {H psd,
///    Col(H) in null(C), H_ii = I}; strict complementarity fails for these
///    instances and the plain alternation crawls, while splitting between
///    {H psd, Col(H) in null(C)} and the affine set converges linearly.
///    Both projections stay exact (one reduced eigendecomposition).
///
/// Deterministic for identical input.
inline std::pair<BlockGram, SolverReport> solve_sdp(const CostMatrix& c,
                                                    const SdpOptions& opts = {}) {
    const int kd = c.K * c.D;
    if (c.blocks.rows() != kd || c.blocks.cols() != kd)
        throw std::invalid_argument("solve_sdp: cost dimensions do not match K*D");
    if (!is_symmetric(c.blocks, 1e-9))
        throw std::invalid_argument("solve_sdp: cost matrix is not symmetric");
    if (opts.rho <= 0.0) throw std::invalid_argument("solve_sdp: rho must be positive");
    if (opts.max_iter < 1) throw std::invalid_argument("solve_sdp: max_iter must be >= 1");

    Eigen::SelfAdjointEigenSolver<Mat> cost_eig(c.blocks);
    if (cost_eig.eigenvalues()(0) < -1e-8 * c.blocks.trace() - 1e-12)
        throw std::invalid_argument("solve_sdp: cost matrix is not PSD within tolerance");

    const detail::StopWatch watch;
    const double tol_primal =
        opts.tol_primal > 0.0 ? opts.tol_primal : opts.tol_factor * (1.0 + c.blocks.norm());
    const double tol_dual =
        opts.tol_dual > 0.0 ? opts.tol_dual : opts.tol_factor * (1.0 + c.blocks.norm());

    const auto as_vec = [](const Mat& m) {
        return Eigen::Map<const Vec>(m.data(), m.size()).eval();
    };
    const bool use_accel = opts.anderson_memory > 0;

    // null space of C, used by the zero-objective refinement
    const double lead_eig = std::max(cost_eig.eigenvalues()(kd - 1), 0.0);
    int null_dim = 0;
    while (null_dim < kd && cost_eig.eigenvalues()(null_dim) <= 1e-10 * std::max(lead_eig, 1e-300))
        ++null_dim;
    const bool refinable = opts.zero_objective_tol > 0.0 && null_dim > 0;

    SolverReport report;
    double primal = 0.0, dual = 0.0;
    int iter = 0;

    // ---- phase 1: splitting on the full problem -------------------------
    const int phase1_budget = refinable ? std::max(1, opts.max_iter / 2) : opts.max_iter;
    double rho = opts.rho;
    Mat s = Mat::Identity(kd, kd);  // = Z0 + W0 with Z0 = I, W0 = 0
    Mat h_prev, z_prev;
    bool warm = false;
    {
        detail::AndersonAccelerator accel(opts.anderson_memory);
        const double zero_trigger = opts.zero_objective_tol * (1.0 + c.blocks.trace());
        const double feas_gate = std::max(tol_primal, 1e-6 * (1.0 + c.blocks.norm()));
        int zero_check_countdown = 0;
        while (iter < phase1_budget) {
            Mat z = s;
            detail::project_identity_diagonal(z, c.K, c.D);
            if (warm) {
                primal = (h_prev - z).norm();
                dual = rho * (z - z_prev).norm();
                if (primal <= tol_primal && dual <= tol_dual) {
                    report.converged = true;
                    break;
                }
                // hand over early once the iterate is near-feasible at a
                // relatively zero objective; the refinement phase owns it
                if (refinable && primal <= feas_gate && --zero_check_countdown <= 0) {
                    zero_check_countdown = 10;
                    if ((c.blocks * h_prev).trace() <= zero_trigger) break;
                }
                if (opts.adaptive_rho) {
                    if (primal > 10.0 * dual && rho < 1e9) {
                        rho *= 2.0;
                        s = z + 0.5 * (s - z);  // W halves when rho doubles
                        accel.reset();
                    } else if (dual > 10.0 * primal && rho > 1e-9) {
                        rho *= 0.5;
                        s = z + 2.0 * (s - z);
                        accel.reset();
                    }
                }
            }

            Mat h = detail::psd_clip(2.0 * z - s - c.blocks / rho);
            ++iter;
            Mat s_next = s - z + h;

            bool accepted = false;
            if (use_accel && iter < phase1_budget) {
                const Vec g = as_vec(s_next) - as_vec(s);
                accel.push(as_vec(s), g);
                if (accel.ready()) {
                    const Vec cand = accel.candidate();
                    const Mat s_cand = Eigen::Map<const Mat>(cand.data(), kd, kd);
                    Mat z_cand = s_cand;
                    detail::project_identity_diagonal(z_cand, c.K, c.D);
                    const Mat h_cand = detail::psd_clip(2.0 * z_cand - s_cand - c.blocks / rho);
                    ++iter;
                    const Mat s_cand_next = s_cand - z_cand + h_cand;
                    const double g_cand_norm = (s_cand_next - s_cand).norm();
                    if (g_cand_norm < g.norm() && std::isfinite(g_cand_norm)) {
                        accel.push(cand, as_vec(s_cand_next) - cand);
                        s = s_cand_next;
                        h_prev = h_cand;
                        z_prev = z_cand;
                        warm = true;
                        accepted = true;
                    }
                }
            }
            if (!accepted) {
                s = std::move(s_next);
                h_prev = std::move(h);
                z_prev = std::move(z);
                warm = true;
            }
        }
    }
    Mat h_best = h_prev;
    double best_residual = primal;

    // ---- phase 2: zero-objective refinement -----------------------------
    const double objective1 = (c.blocks * h_best).trace();
    if (refinable && objective1 <= opts.zero_objective_tol * (1.0 + c.blocks.trace())) {
        const Mat basis = cost_eig.eigenvectors().leftCols(null_dim);
        const double tol_feas = std::min(tol_primal, tol_dual);

        const auto project_face = [&](const Mat& m) {
            const Mat reduced = basis.transpose() * m * basis;
            return (basis *
                    detail::psd_clip(0.5 * (reduced + reduced.transpose())) *
                    basis.transpose())
                .eval();
        };
        // one reflect-project pass: returns the face point and the next s
        struct FaceStep {
            Mat face;
            Mat s_next;
            double residual;
        };
        const auto face_step = [&](const Mat& sv) {
            FaceStep st;
            st.face = project_face(sv);
            Mat affine = 2.0 * st.face - sv;
            detail::project_identity_diagonal(affine, c.K, c.D);
            st.residual = (affine - st.face).norm();
            st.s_next = sv + affine - st.face;
            return st;
        };

        detail::AndersonAccelerator accel(opts.anderson_memory);
        Mat s2 = h_best;
        bool face_converged = false;
        double face_residual = 0.0;
        Mat h_face;
        while (iter < opts.max_iter) {
            FaceStep st = face_step(s2);
            ++iter;
            h_face = std::move(st.face);
            face_residual = st.residual;
            if (face_residual <= tol_feas) {
                face_converged = true;
                break;
            }

            bool accepted = false;
            if (use_accel && iter < opts.max_iter) {
                const Vec g = as_vec(st.s_next) - as_vec(s2);
                accel.push(as_vec(s2), g);
                if (accel.ready()) {
                    const Vec cand = accel.candidate();
                    const Mat s_cand = Eigen::Map<const Mat>(cand.data(), kd, kd);
                    FaceStep cand_st = face_step(s_cand);
                    ++iter;
                    const double g_cand_norm = (cand_st.s_next - s_cand).norm();
                    if (g_cand_norm < g.norm() && std::isfinite(g_cand_norm)) {
                        accel.push(as_vec(s_cand), as_vec(cand_st.s_next) - as_vec(s_cand));
                        s2 = std::move(cand_st.s_next);
                        h_face = std::move(cand_st.face);
                        face_residual = cand_st.residual;
                        if (face_residual <= tol_feas) {
                            face_converged = true;
                            break;
                        }
                        accepted = true;
                    }
                }
            }
            if (!accepted) s2 = std::move(st.s_next);
        }

        if (face_converged || face_residual < best_residual) {
            h_best = std::move(h_face);
            best_residual = face_residual;
            primal = face_residual;
            dual = face_residual;
            report.converged = face_converged;
        }
    }

    report.iterations = iter;
    report.primal_residual = primal;
    report.dual_residual = dual;
    report.objective = (c.blocks * h_best).trace();
    report.runtime_seconds = watch.seconds();
    if (!report.converged)
        report.warnings.push_back("solve_sdp: max_iter reached before residual tolerances");
    return {BlockGram{c.K, c.D, std::move(h_best)}, std::move(report)};
}

/// Factor H = Q clip(Lambda) Q^T into U = Q clip(Lambda)^{1/2} over the full
/// clipped eigenspectrum (r = KD columns).
inline FactorMatrix factor_gram(const BlockGram& h) {
    const SymEig eig = sym_eig(h.H);
    FactorMatrix f;
    f.K = h.K;
    f.D = h.D;
    f.r = static_cast<int>(h.H.rows());
    f.U = eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    return f;
}

struct ExtractionDiagnostics {
    int numerical_rank = 0;
    std::vector<std::string> warnings;
};

/// Rounding step: V_i = f(-U_i U_K^T) for i = 1..K-1, where f is the
/// nearest-orthogonal-matrix rounding.
inline std::pair<OrthogonalSet, ExtractionDiagnostics> extract_solution(
    const BlockGram& h, const SolverReport& report = {}) {
    const SymEig eig = sym_eig(h.H);
    FactorMatrix f;
    f.K = h.K;
    f.D = h.D;
    f.r = static_cast<int>(h.H.rows());
    f.U = eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    ExtractionDiagnostics diag;
    const double lead = std::max(eig.values(0), 0.0);
    for (int i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) > 1e-8 * std::max(lead, 1e-300)) ++diag.numerical_rank;
    if (!report.converged && !report.warnings.empty())
        diag.warnings.insert(diag.warnings.end(), report.warnings.begin(), report.warnings.end());

    const Mat uk = f.U.middleRows((h.K - 1) * h.D, h.D);
    OrthogonalSet out;
    out.matrices.reserve(h.K - 1);
    for (int i = 0; i + 1 < h.K; ++i) {
        const Mat ui = f.U.middleRows(i * h.D, h.D);
        bool degenerate = false;
        out.matrices.push_back(polar_round(-(ui * uk.transpose()), &degenerate));
        if (degenerate)
            diag.warnings.push_back("extract_solution: rank-deficient rounding for V_" +
                                    std::to_string(i + 1));
    }
    return {std::move(out), std::move(diag)};
}

/// Frobenius norm of U's component orthogonal to the block-consensus
/// subspace L1 = {(v, v, ..., v)}; zero iff all blocks U_i coincide.
inline double consensus_deviation(const FactorMatrix& f) {
    Mat mean = Mat::Zero(f.D, f.U.cols());
    for (int i = 0; i < f.K; ++i) mean += f.U.middleRows(i * f.D, f.D);
    mean /= static_cast<double>(f.K);
    double sq = 0.0;
    for (int i = 0; i < f.K; ++i)
        sq += (f.U.middleRows(i * f.D, f.D) - mean).squaredNorm();
    return std::sqrt(sq);
}

}  // namespace omr
