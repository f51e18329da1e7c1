#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "iatsf/linalg.hpp"

namespace iatsf {

/// One additive intervention channel: X gains B * u with u ~ N(mu, Sigma).
struct Intervention {
    linalg::MatrixXd B;      // [n x p]
    linalg::VectorXd mu;     // [p]
    linalg::MatrixXd Sigma;  // [p x p], PSD
};

/// X_f = A X_h + sum_j B_j U_j + w, optionally observed through x = H z.
struct LinearSystemSpec {
    linalg::MatrixXd A;  // [n x n]
    std::vector<Intervention> interventions;
    linalg::MatrixXd Sigma_w;                 // [n x n], PSD
    std::optional<linalg::MatrixXd> H;        // [m x n], m <= n

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index obs_dim() const { return H ? H->rows() : A.rows(); }

    /// Dimensional consistency + PSD checks (Cholesky with jitter <= 1e-10).
    void validate() const;
};

/// Row-per-sample simulation output. When the spec has an observation map H,
/// xh/xf hold the observed coordinates and zh/zf the underlying states;
/// otherwise xh/xf alias the states.
struct LinearDataset {
    linalg::MatrixXd xh;               // [N x m]
    linalg::MatrixXd xf;               // [N x m]
    linalg::MatrixXd zh;               // [N x n]
    linalg::MatrixXd zf;               // [N x n]
    std::vector<linalg::MatrixXd> u;   // per intervention: [N x p_j]
};

using StateSampler = std::function<linalg::VectorXd(Rng&)>;

/// i.i.d. (X_h, {U_j}, X_f) triples. The history distribution defaults to
/// standard normal and is independent of the interventions.
LinearDataset simulate_linear(const LinearSystemSpec& spec, int n_samples, uint64_t seed,
                              const StateSampler& state_sampler = {});

/// Row-wise linear projection of states through H.
linalg::MatrixXd observe(const linalg::MatrixXd& states, const linalg::MatrixXd& H);

}  // namespace iatsf
