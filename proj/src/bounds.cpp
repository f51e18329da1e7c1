#include "iatsf/bounds.hpp"

#include <nlohmann/json.hpp>

namespace iatsf {

using linalg::MatrixXd;
using linalg::VectorXd;

namespace {

nlohmann::json matrix_to_json(const MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::string FloorReport::to_json(const std::string& name) const {
    nlohmann::json j;
    if (!name.empty()) j["name"] = name;
    j["floor"] = matrix_to_json(floor);
    j["empirical"] = matrix_to_json(empirical);
    j["gap_min_eig"] = gap_min_eig;
    j["tolerance"] = tolerance;
    j["verdict"] = pass ? "pass" : "fail";
    return j.dump(2);
}

MatrixXd floor_self_stim(const std::vector<Intervention>& interventions) {
    if (interventions.empty()) throw DimensionError("floor_self_stim: no interventions");
    const Eigen::Index n = interventions[0].B.rows();
    MatrixXd floor = MatrixXd::Zero(n, n);
    for (const Intervention& iv : interventions) {
        if (iv.B.rows() != n) throw DimensionError("floor_self_stim: inconsistent B rows");
        if (iv.B.cols() != iv.Sigma.rows() || iv.Sigma.rows() != iv.Sigma.cols()) {
            throw DimensionError("floor_self_stim: B/Sigma dimensions disagree");
        }
        floor += iv.B * iv.Sigma * iv.B.transpose();
    }
    return linalg::symmetrize(floor);
}

MatrixXd floor_self_stim_nonlinear(const SystemFn& F, const VectorXd& mu, const MatrixXd& Sigma,
                                   const std::vector<VectorXd>& xh_samples, double fd_step) {
    if (Sigma.rows() != mu.size() || Sigma.cols() != mu.size()) {
        throw DimensionError("floor_self_stim_nonlinear: Sigma/mu dimensions disagree");
    }
    if (xh_samples.empty()) throw ValidationError("floor_self_stim_nonlinear: no history samples");
    linalg::cholesky_psd(Sigma);

    MatrixXd acc;
    for (const VectorXd& xh : xh_samples) {
        // Central-difference Jacobian dF/dU at (xh, mu).
        MatrixXd jac;
        for (Eigen::Index k = 0; k < mu.size(); ++k) {
            VectorXd up = mu, dn = mu;
            up(k) += fd_step;
            dn(k) -= fd_step;
            VectorXd fp = F(xh, up);
            VectorXd fm = F(xh, dn);
            if (!fp.allFinite() || !fm.allFinite()) {
                throw ValidationError("floor_self_stim_nonlinear: non-finite system output");
            }
            if (jac.size() == 0) jac.resize(fp.size(), mu.size());
            jac.col(k) = (fp - fm) / (2.0 * fd_step);
        }
        MatrixXd term = jac * Sigma * jac.transpose();
        if (acc.size() == 0) {
            acc = term;
        } else {
            acc += term;
        }
    }
    return linalg::symmetrize(acc / static_cast<double>(xh_samples.size()));
}

MatrixXd intervention_reduction(const MatrixXd& B, const MatrixXd& Sigma) {
    if (B.cols() != Sigma.rows() || Sigma.rows() != Sigma.cols()) {
        throw DimensionError("intervention_reduction: B/Sigma dimensions disagree");
    }
    return linalg::symmetrize(B * Sigma * B.transpose());
}

MatrixXd floor_forecaster(const MatrixXd& Sigma_w, const MatrixXd& B, const MatrixXd& Sigma_uhat) {
    if (B.cols() != Sigma_uhat.rows() || Sigma_uhat.rows() != Sigma_uhat.cols()) {
        throw DimensionError("floor_forecaster: B/Sigma_uhat dimensions disagree");
    }
    if (Sigma_w.rows() != B.rows() || Sigma_w.cols() != B.rows()) {
        throw DimensionError("floor_forecaster: Sigma_w dimensions disagree");
    }
    linalg::cholesky_psd(Sigma_w);
    linalg::cholesky_psd(Sigma_uhat);
    return linalg::symmetrize(Sigma_w + B * Sigma_uhat * B.transpose());
}

WeightSharingFloor floor_weight_sharing(const MatrixXd& C_stack, const MatrixXd& Sigma_Z) {
    const Eigen::Index k = C_stack.rows(), n = C_stack.cols();
    if (k < 1) throw DimensionError("floor_weight_sharing: need at least one channel");
    if (Sigma_Z.rows() != n || Sigma_Z.cols() != n) {
        throw DimensionError("floor_weight_sharing: Sigma_Z must be [n x n]");
    }
    linalg::cholesky_psd(Sigma_Z);
    WeightSharingFloor out;
    out.c_opt = C_stack.colwise().mean();
    MatrixXd dev = C_stack.rowwise() - out.c_opt;
    out.floor = linalg::symmetrize(dev * Sigma_Z * dev.transpose());
    return out;
}

MatrixXd floor_partial_observation(const MatrixXd& H, const MatrixXd& A,
                                   const std::vector<Intervention>& interventions,
                                   const MatrixXd& cov_hidden) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw DimensionError("floor_partial_observation: A must be square");
    if (H.cols() != n) throw DimensionError("floor_partial_observation: H must have n columns");
    if (cov_hidden.rows() != n || cov_hidden.cols() != n) {
        throw DimensionError("floor_partial_observation: cov_hidden must be [n x n]");
    }
    linalg::cholesky_psd(cov_hidden);
    MatrixXd intervention_term = H * floor_self_stim(interventions) * H.transpose();
    MatrixXd ha = H * A;
    MatrixXd hidden_term = ha * cov_hidden * ha.transpose();
    return linalg::symmetrize(intervention_term + hidden_term);
}

namespace {

OLSFit fit_ols(const MatrixXd& regressors, const MatrixXd& xf) {
    const Eigen::Index n = regressors.rows();
    const Eigen::Index k = regressors.cols();
    if (xf.rows() != n) throw DimensionError("fit_ols: sample count mismatch");
    if (n < k + 2) throw ValidationError("fit_ols: too few samples for the design");

    MatrixXd phi(n, k + 1);
    phi.leftCols(k) = regressors;
    phi.col(k).setOnes();

    MatrixXd gram = (phi.transpose() * phi) / static_cast<double>(n);
    VectorXd eig = linalg::eigenvalues_sym(gram);
    const double lo = eig.minCoeff(), hi = eig.maxCoeff();
    if (lo <= 0.0 || hi / lo > 1e10) {
        throw ConditioningError("fit_ols: singular design (condition number > 1e10)");
    }
    MatrixXd rhs = (phi.transpose() * xf) / static_cast<double>(n);
    MatrixXd w = gram.ldlt().solve(rhs);  // [(k+1) x d]

    OLSFit fit;
    fit.C = w.topRows(k).transpose();
    fit.d_vec = w.row(k).transpose();
    MatrixXd resid = xf - phi * w;
    fit.residual_cov = linalg::symmetrize((resid.transpose() * resid) / static_cast<double>(n));
    return fit;
}

}  // namespace

OLSFit fit_ols_self_stim(const MatrixXd& xh, const MatrixXd& xf) { return fit_ols(xh, xf); }

OLSFit fit_ols_intervention_aware(const MatrixXd& xh, const MatrixXd& xf,
                                  const std::vector<MatrixXd>& observed_u) {
    Eigen::Index extra = 0;
    for (const MatrixXd& u : observed_u) {
        if (u.rows() != xh.rows()) {
            throw DimensionError("fit_ols_intervention_aware: sample count mismatch");
        }
        extra += u.cols();
    }
    MatrixXd regressors(xh.rows(), xh.cols() + extra);
    regressors.leftCols(xh.cols()) = xh;
    Eigen::Index off = xh.cols();
    for (const MatrixXd& u : observed_u) {
        regressors.middleCols(off, u.cols()) = u;
        off += u.cols();
    }
    return fit_ols(regressors, xf);
}

FloorReport verify_floor(const MatrixXd& empirical, const MatrixXd& floor, double tolerance) {
    if (empirical.rows() != empirical.cols() || floor.rows() != floor.cols() ||
        empirical.rows() != floor.rows()) {
        throw DimensionError("verify_floor: matrices must be square with equal dims");
    }
    FloorReport report;
    report.floor = linalg::symmetrize(floor);
    report.empirical = linalg::symmetrize(empirical);
    report.tolerance = tolerance;
    report.gap_min_eig = linalg::min_eigenvalue(report.empirical - report.floor);
    report.pass = report.gap_min_eig >= -tolerance;
    return report;
}

}  // namespace iatsf
