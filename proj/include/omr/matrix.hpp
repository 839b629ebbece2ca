#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace omr {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Symmetric eigendecomposition S = vectors * diag(values) * vectors^T,
/// eigenvalues sorted descending, eigenvector columns orthonormal.
struct SymEig {
    Vec values;
    Mat vectors;
};

/// Z = left * diag(singulars) * right^T, singular values sorted descending.
struct Svd {
    Mat left;
    Vec singulars;
    Mat right;
};

inline bool is_symmetric(const Mat& s, double rel_tol = 1e-10) {
    if (s.rows() != s.cols()) return false;
    const double scale = 1.0 + s.norm();
    return (s - s.transpose()).norm() <= rel_tol * scale;
}

inline SymEig sym_eig(const Mat& s) {
    if (s.rows() != s.cols())
        throw std::invalid_argument("sym_eig: matrix must be square, got " +
                                    std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
    if (!is_symmetric(s))
        throw std::invalid_argument("sym_eig: matrix is not symmetric within tolerance");

    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("sym_eig: eigendecomposition failed");

    // Eigen returns ascending order; flip to descending.
    SymEig out;
    out.values = es.eigenvalues().reverse();
    out.vectors = es.eigenvectors().rowwise().reverse();
    return out;
}

inline Svd svd(const Mat& z) {
    if (!z.allFinite())
        throw std::invalid_argument("svd: input has non-finite entries");
    Eigen::JacobiSVD<Mat> d(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return Svd{d.matrixU(), d.singularValues(), d.matrixV()};
}

/// Nearest orthogonal matrix  f(Z) = U_Z V_Z^T  from the SVD of Z.
/// When Z is (numerically) rank deficient the minimizer is not unique;
/// U_Z V_Z^T is still returned and *degenerate, if given, is set.
inline Mat polar_round(const Mat& z, bool* degenerate = nullptr) {
    if (z.rows() != z.cols())
        throw std::invalid_argument("polar_round: matrix must be square");
    const Svd d = svd(z);
    if (degenerate) {
        const double smax = d.singulars.size() ? d.singulars(0) : 0.0;
        const double smin = d.singulars.size() ? d.singulars(d.singulars.size() - 1) : 0.0;
        *degenerate = (smin <= 1e-12 * smax) || (smax == 0.0);
    }
    return d.left * d.right.transpose();
}

/// Frobenius-nearest positive semidefinite matrix: clip negative eigenvalues.
inline Mat psd_project(const Mat& s) {
    if (s.rows() != s.cols())
        throw std::invalid_argument("psd_project: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
    const Vec clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

/// Frobenius-nearest point of the unit operator-norm ball: clip singular values at 1.
inline Mat spectral_ball_project(const Mat& m) {
    const Svd d = svd(m);
    if (d.singulars.size() == 0 || d.singulars(0) <= 1.0) return m;
    const Vec clipped = d.singulars.cwiseMin(1.0);
    return d.left * clipped.asDiagonal() * d.right.transpose();
}

/// Largest singular value.
inline double operator_norm(const Mat& m) {
    return m.jacobiSvd().singularValues()(0);
}

}  // namespace omr
