#include "iatsf/linear_system.hpp"

namespace iatsf {

using linalg::MatrixXd;
using linalg::VectorXd;

void LinearSystemSpec::validate() const {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw DimensionError("LinearSystemSpec: A must be square");
    if (Sigma_w.rows() != n || Sigma_w.cols() != n) {
        throw DimensionError("LinearSystemSpec: Sigma_w must be [n x n]");
    }
    linalg::cholesky_psd(Sigma_w);
    for (size_t j = 0; j < interventions.size(); ++j) {
        const Intervention& iv = interventions[j];
        const Eigen::Index p = iv.B.cols();
        if (iv.B.rows() != n) {
            throw DimensionError("LinearSystemSpec: B_" + std::to_string(j) + " must have n rows");
        }
        if (iv.mu.size() != p || iv.Sigma.rows() != p || iv.Sigma.cols() != p) {
            throw DimensionError("LinearSystemSpec: intervention " + std::to_string(j) +
                                 " dimensions inconsistent");
        }
        linalg::cholesky_psd(iv.Sigma);
    }
    if (H) {
        if (H->cols() != n) throw DimensionError("LinearSystemSpec: H must have n columns");
        if (H->rows() > n) throw DimensionError("LinearSystemSpec: H must have m <= n rows");
    }
}

LinearDataset simulate_linear(const LinearSystemSpec& spec, int n_samples, uint64_t seed,
                              const StateSampler& state_sampler) {
    if (n_samples <= 0) throw ValidationError("simulate_linear: n_samples must be positive");
    spec.validate();
    const Eigen::Index n = spec.state_dim();

    std::vector<MatrixXd> chol_u;
    chol_u.reserve(spec.interventions.size());
    for (const Intervention& iv : spec.interventions) chol_u.push_back(linalg::cholesky_psd(iv.Sigma));
    const bool has_noise = spec.Sigma_w.cwiseAbs().maxCoeff() > 0.0;
    MatrixXd chol_w = has_noise ? linalg::cholesky_psd(spec.Sigma_w) : MatrixXd::Zero(n, n);

    Rng rng(seed);
    Rng rng_state = rng.split(1);
    Rng rng_u = rng.split(2);
    Rng rng_w = rng.split(3);

    LinearDataset ds;
    ds.zh.resize(n_samples, n);
    ds.zf.resize(n_samples, n);
    ds.u.reserve(spec.interventions.size());
    for (const Intervention& iv : spec.interventions) {
        ds.u.emplace_back(n_samples, iv.mu.size());
    }

    for (int i = 0; i < n_samples; ++i) {
        VectorXd zh = state_sampler ? state_sampler(rng_state)
                                    : linalg::sample_standard_normal(n, rng_state);
        if (zh.size() != n) throw DimensionError("simulate_linear: state sampler dimension");
        VectorXd zf = spec.A * zh;
        for (size_t j = 0; j < spec.interventions.size(); ++j) {
            VectorXd u = linalg::sample_mvn(spec.interventions[j].mu, chol_u[j], rng_u);
            ds.u[j].row(i) = u.transpose();
            zf += spec.interventions[j].B * u;
        }
        if (has_noise) zf += chol_w * linalg::sample_standard_normal(n, rng_w);
        ds.zh.row(i) = zh.transpose();
        ds.zf.row(i) = zf.transpose();
    }

    if (spec.H) {
        ds.xh = observe(ds.zh, *spec.H);
        ds.xf = observe(ds.zf, *spec.H);
    } else {
        ds.xh = ds.zh;
        ds.xf = ds.zf;
    }
    return ds;
}

MatrixXd observe(const MatrixXd& states, const MatrixXd& H) {
    if (H.cols() != states.cols()) {
        throw DimensionError("observe: H has " + std::to_string(H.cols()) + " columns, states " +
                             std::to_string(states.cols()));
    }
    return states * H.transpose();
}

}  // namespace iatsf
