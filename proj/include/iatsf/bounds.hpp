#pragma once

#include <functional>
#include <string>
#include <vector>

#include "iatsf/linear_system.hpp"

namespace iatsf {

/// An analytical lower bound on prediction error covariance paired with an
/// empirically estimated covariance; pass means empirical - floor is PSD up
/// to the stated tolerance on its smallest eigenvalue.
struct FloorReport {
    linalg::MatrixXd floor;
    linalg::MatrixXd empirical;
    double gap_min_eig = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    std::string to_json(const std::string& name = "") const;
};

/// Least-squares linear predictor xf_hat = C * regressors + d_vec.
struct OLSFit {
    linalg::MatrixXd C;
    linalg::VectorXd d_vec;
    linalg::MatrixXd residual_cov;
};

/// Irreducible covariance floor of a history-only predictor:
/// sum_j B_j Sigma_j B_j^T.
linalg::MatrixXd floor_self_stim(const std::vector<Intervention>& interventions);

using SystemFn =
    std::function<linalg::VectorXd(const linalg::VectorXd& xh, const linalg::VectorXd& u)>;

/// General form of the same floor for a black-box system: the average over
/// history samples of J Sigma J^T with J = dF/dU at (xh, mu), estimated by
/// central finite differences.
linalg::MatrixXd floor_self_stim_nonlinear(const SystemFn& F, const linalg::VectorXd& mu,
                                           const linalg::MatrixXd& Sigma,
                                           const std::vector<linalg::VectorXd>& xh_samples,
                                           double fd_step = 1e-5);

/// Covariance removed by conditioning on one observed intervention:
/// B_j Sigma_j B_j^T.
linalg::MatrixXd intervention_reduction(const linalg::MatrixXd& B, const linalg::MatrixXd& Sigma);

/// Test error of a perfect model driven by an external intervention
/// forecaster with error covariance Sigma_uhat: Sigma_w + B Sigma_uhat B^T.
linalg::MatrixXd floor_forecaster(const linalg::MatrixXd& Sigma_w, const linalg::MatrixXd& B,
                                  const linalg::MatrixXd& Sigma_uhat);

struct WeightSharingFloor {
    Eigen::RowVectorXd c_opt;   // optimal shared read-out weight
    linalg::MatrixXd floor;     // (C - 1 c_opt) Sigma_Z (C - 1 c_opt)^T
};

/// Error floor of forcing k channels with distinct read-out rows C_i to share
/// a single weight; the trace-optimal shared weight is the row mean of C.
WeightSharingFloor floor_weight_sharing(const linalg::MatrixXd& C_stack,
                                        const linalg::MatrixXd& Sigma_Z);

/// Floor for a partially observed system x = H z:
/// H (sum_j B_j Sigma_j B_j^T) H^T + (H A) Cov(z_hidden) (H A)^T.
linalg::MatrixXd floor_partial_observation(const linalg::MatrixXd& H, const linalg::MatrixXd& A,
                                           const std::vector<Intervention>& interventions,
                                           const linalg::MatrixXd& cov_hidden);

/// Closed-form least squares of xf on [xh; 1].
OLSFit fit_ols_self_stim(const linalg::MatrixXd& xh, const linalg::MatrixXd& xf);

/// Least squares on the augmented regressors [xh; observed u...; 1]; the
/// residual covariance estimates the error after conditioning on those
/// interventions.
OLSFit fit_ols_intervention_aware(const linalg::MatrixXd& xh, const linalg::MatrixXd& xf,
                                  const std::vector<linalg::MatrixXd>& observed_u);

FloorReport verify_floor(const linalg::MatrixXd& empirical, const linalg::MatrixXd& floor,
                         double tolerance);

}  // namespace iatsf
