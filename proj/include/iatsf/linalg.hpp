#pragma once

#include <Eigen/Dense>

#include "iatsf/errors.hpp"
#include "iatsf/rng.hpp"

namespace iatsf::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd symmetrize(const MatrixXd& s) { return 0.5 * (s + s.transpose()); }

/// Cholesky factor of a symmetric PSD matrix, adding a diagonal jitter of at
/// most `max_jitter` so rank-deficient covariances factor cleanly. Throws
/// ValidationError if the matrix is not PSD within that jitter.
inline MatrixXd cholesky_psd(const MatrixXd& s, double max_jitter = 1e-10) {
    if (s.rows() != s.cols()) throw DimensionError("cholesky_psd: matrix not square");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + s.cwiseAbs().maxCoeff())) {
        throw ValidationError("cholesky_psd: matrix not symmetric");
    }
    MatrixXd sym = symmetrize(s);
    if (sym.cwiseAbs().maxCoeff() == 0.0) return MatrixXd::Zero(s.rows(), s.cols());
    for (double jitter : {0.0, max_jitter * 0.01, max_jitter * 0.1, max_jitter}) {
        Eigen::LLT<MatrixXd> llt(sym + jitter * MatrixXd::Identity(s.rows(), s.cols()));
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw ValidationError("cholesky_psd: matrix not positive semidefinite (jitter <= " +
                          std::to_string(max_jitter) + ")");
}

inline VectorXd sample_standard_normal(Eigen::Index n, Rng& rng) {
    VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    return z;
}

/// Draw from N(mu, L L^T) given the Cholesky factor L.
inline VectorXd sample_mvn(const VectorXd& mu, const MatrixXd& chol_l, Rng& rng) {
    return mu + chol_l * sample_standard_normal(mu.size(), rng);
}

inline VectorXd eigenvalues_sym(const MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(s));
    if (es.info() != Eigen::Success) throw ConditioningError("eigenvalues_sym: solver failed");
    return es.eigenvalues();
}

inline double min_eigenvalue(const MatrixXd& s) { return eigenvalues_sym(s).minCoeff(); }

inline MatrixXd pseudo_inverse(const MatrixXd& m) {
    return m.completeOrthogonalDecomposition().pseudoInverse();
}

inline double frobenius(const MatrixXd& m) { return m.norm(); }

/// Sample covariance (1/n normalization) of row-sample matrices.
inline MatrixXd sample_covariance(const MatrixXd& rows) {
    const double n = static_cast<double>(rows.rows());
    Eigen::RowVectorXd mean = rows.colwise().mean();
    MatrixXd centered = rows.rowwise() - mean;
    return (centered.transpose() * centered) / n;
}

/// Cross-covariance Cov(a, b) of two row-sample matrices with equal row count.
inline MatrixXd sample_cross_covariance(const MatrixXd& a, const MatrixXd& b) {
    if (a.rows() != b.rows()) throw DimensionError("sample_cross_covariance: row mismatch");
    const double n = static_cast<double>(a.rows());
    MatrixXd ca = a.rowwise() - a.colwise().mean();
    MatrixXd cb = b.rowwise() - b.colwise().mean();
    return (ca.transpose() * cb) / n;
}

}  // namespace iatsf::linalg
