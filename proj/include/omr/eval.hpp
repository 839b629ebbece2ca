#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "omr/matrix.hpp"
#include "omr/problem.hpp"
#include "omr/sdp.hpp"

namespace omr {

/// One solver run on one instance, ready for CSV serialization.
struct TrialResult {
    std::string solver;
    int K = 0;
    int N = 0;
    int D = 0;
    double sigma = 0.0;
    long trial = 0;
    std::uint64_t seed = 0;
    std::vector<double> errors;  // per-matrix ||Vhat_i - V_i||_F
    double err_V1 = 0.0;
    double err_mean = 0.0;
    double err_max = 0.0;
    bool success = false;
    double threshold = 0.0;
    SolverReport report;
};

/// Direct per-matrix Frobenius errors ||Vhat_i - V_i||_F. No alignment is
/// applied: the extraction convention already fixes the global ambiguity.
inline std::vector<double> recovery_error(const OrthogonalSet& estimate,
                                          const OrthogonalSet& truth) {
    if (estimate.matrices.size() != truth.matrices.size())
        throw std::invalid_argument("recovery_error: mismatched matrix counts");
    std::vector<double> errs;
    errs.reserve(estimate.matrices.size());
    for (std::size_t i = 0; i < estimate.matrices.size(); ++i) {
        const Mat& a = estimate.matrices[i];
        const Mat& b = truth.matrices[i];
        if (a.rows() != b.rows() || a.cols() != b.cols())
            throw std::invalid_argument("recovery_error: mismatched dimensions at index " +
                                        std::to_string(i));
        errs.push_back((a - b).norm());
    }
    return errs;
}

struct OracleResult {
    OrthogonalSet signs;     // K-1 scalar matrices holding +/-1
    double residual = 0.0;   // ||X_K - sum s_i X_i||_F at the minimizer
    bool unique = true;      // strict minimizer (no tie within tolerance)
};

/// Exhaustive D=1 oracle: O(1) = {-1, +1}, so all 2^(K-1) sign vectors are
/// enumerated and the residual minimizer returned.
inline OracleResult brute_force_oracle(const ProblemInstance& inst) {
    if (inst.D != 1)
        throw std::invalid_argument("brute_force_oracle: requires D = 1");
    if (inst.K > 12)
        throw std::invalid_argument("brute_force_oracle: K too large for enumeration");

    const int m = inst.K - 1;
    const std::uint32_t patterns = 1u << m;
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    std::uint32_t best_bits = 0;
    for (std::uint32_t bits = 0; bits < patterns; ++bits) {
        Mat sum = Mat::Zero(inst.N, 1);
        for (int i = 0; i < m; ++i)
            sum += ((bits >> i) & 1u ? 1.0 : -1.0) * inst.X[i];
        const double resid = (inst.X[inst.K - 1] - sum).norm();
        if (resid < best) {
            second = best;
            best = resid;
            best_bits = bits;
        } else if (resid < second) {
            second = resid;
        }
    }

    OracleResult out;
    out.residual = best;
    out.unique = (second - best) > 1e-9 * (1.0 + inst.X[inst.K - 1].norm());
    out.signs.matrices.reserve(m);
    for (int i = 0; i < m; ++i) {
        Mat s(1, 1);
        s(0, 0) = ((best_bits >> i) & 1u) ? 1.0 : -1.0;
        out.signs.matrices.push_back(std::move(s));
    }
    return out;
}

/// Success iff the worst per-matrix error is within the threshold.
inline bool classify_success(const TrialResult& result, double threshold) {
    if (threshold <= 0.0)
        throw std::invalid_argument("classify_success: threshold must be positive");
    return result.err_max <= threshold;
}

/// Default success threshold: 1e-3 for clean runs, 10*sigma*sqrt(D) noisy.
inline double default_threshold(double sigma, int D) {
    return sigma == 0.0 ? 1e-3 : 10.0 * sigma * std::sqrt(static_cast<double>(D));
}

/// Fill the error summary fields of a TrialResult from estimate vs truth.
inline void fill_errors(TrialResult& result, const OrthogonalSet& estimate,
                        const OrthogonalSet& truth, double threshold) {
    result.errors = recovery_error(estimate, truth);
    result.err_V1 = result.errors.empty() ? 0.0 : result.errors.front();
    result.err_mean = result.errors.empty()
                          ? 0.0
                          : std::accumulate(result.errors.begin(), result.errors.end(), 0.0) /
                                static_cast<double>(result.errors.size());
    result.err_max = 0.0;
    for (double e : result.errors) result.err_max = std::max(result.err_max, e);
    result.threshold = threshold;
    result.success = classify_success(result, threshold);
}

}  // namespace omr
