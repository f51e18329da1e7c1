#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iatsf/bounds.hpp"
#include "iatsf/linear_system.hpp"

using namespace iatsf;
using linalg::MatrixXd;
using linalg::VectorXd;

namespace {

LinearSystemSpec dual_spec(double mu1 = 0.0, double sigma_w = 0.0) {
    LinearSystemSpec spec;
    spec.A = 0.8 * MatrixXd::Identity(2, 2);
    Intervention i1, i2;
    i1.B = MatrixXd(2, 1);
    i1.B << 1, 0;
    i1.mu = VectorXd::Constant(1, mu1);
    i1.Sigma = MatrixXd::Constant(1, 1, 0.5);
    i2.B = MatrixXd(2, 1);
    i2.B << 0, 1;
    i2.mu = VectorXd::Zero(1);
    i2.Sigma = MatrixXd::Constant(1, 1, 0.3);
    spec.interventions = {i1, i2};
    spec.Sigma_w = sigma_w * MatrixXd::Identity(2, 2);
    return spec;
}

Intervention random_intervention(Rng& rng, int n, int p) {
    Intervention iv;
    iv.B = MatrixXd::NullaryExpr(n, p, [&] { return rng.normal(); });
    iv.mu = VectorXd::NullaryExpr(p, [&] { return rng.normal(); });
    MatrixXd root = MatrixXd::NullaryExpr(p, p, [&] { return 0.5 * rng.normal(); });
    iv.Sigma = root * root.transpose();
    return iv;
}

}  // namespace

TEST_CASE("floor_self_stim: dual-intervention closed form") {
    LinearSystemSpec spec = dual_spec();
    MatrixXd floor = floor_self_stim(spec.interventions);
    CHECK(floor(0, 0) == doctest::Approx(0.5));
    CHECK(floor(1, 1) == doctest::Approx(0.3));
    CHECK(floor(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("floor_self_stim: zero covariances give the zero matrix") {
    LinearSystemSpec spec = dual_spec();
    spec.interventions[0].Sigma.setZero();
    spec.interventions[1].Sigma.setZero();
    CHECK(floor_self_stim(spec.interventions).cwiseAbs().maxCoeff() == 0.0);
}

// [DERIVED] MC oracle: the floor equals the covariance of the summed
// intervention drive over 1e6 draws.
TEST_CASE("floor_self_stim: matches Monte Carlo covariance within 1%") {
    Rng rng(314);
    std::vector<Intervention> ivs = {random_intervention(rng, 3, 2),
                                     random_intervention(rng, 3, 1)};
    MatrixXd floor = floor_self_stim(ivs);

    const int n = 1000000;
    std::vector<MatrixXd> chol;
    for (const Intervention& iv : ivs) chol.push_back(linalg::cholesky_psd(iv.Sigma));
    MatrixXd drive(n, 3);
    Rng draw = rng.split(9);
    for (int i = 0; i < n; ++i) {
        VectorXd x = VectorXd::Zero(3);
        for (size_t j = 0; j < ivs.size(); ++j) {
            x += ivs[j].B * linalg::sample_mvn(ivs[j].mu, chol[j], draw);
        }
        drive.row(i) = x.transpose();
    }
    MatrixXd mc = linalg::sample_covariance(drive);
    CHECK(linalg::frobenius(mc - floor) / linalg::frobenius(floor) < 0.01);
}

TEST_CASE("floor_self_stim_nonlinear: linear system is exact") {
    Rng rng(5);
    Intervention iv = random_intervention(rng, 3, 2);
    SystemFn f = [&](const VectorXd& xh, const VectorXd& u) -> VectorXd {
        return 0.3 * xh + iv.B * u;
    };
    std::vector<VectorXd> xhs;
    for (int i = 0; i < 4; ++i) xhs.push_back(linalg::sample_standard_normal(3, rng));
    MatrixXd got = floor_self_stim_nonlinear(f, iv.mu, iv.Sigma, xhs);
    MatrixXd want = iv.B * iv.Sigma * iv.B.transpose();
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("floor_self_stim_nonlinear: constant system has zero floor") {
    SystemFn f = [](const VectorXd&, const VectorXd&) -> VectorXd {
        return VectorXd::Constant(2, 3.0);
    };
    std::vector<VectorXd> xhs = {VectorXd::Zero(2)};
    MatrixXd got = floor_self_stim_nonlinear(f, VectorXd::Zero(1), MatrixXd::Identity(1, 1), xhs);
    CHECK(got.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("floor_self_stim_nonlinear: sin(u) drive at mu=0 gives sigma^2 b b^T") {
    VectorXd b(2);
    b << 1.0, -2.0;
    const double sigma2 = 0.5;
    SystemFn f = [&](const VectorXd& xh, const VectorXd& u) -> VectorXd {
        return xh + std::sin(u(0)) * b;
    };
    std::vector<VectorXd> xhs = {VectorXd::Zero(2), VectorXd::Ones(2)};
    MatrixXd got = floor_self_stim_nonlinear(f, VectorXd::Zero(1),
                                             MatrixXd::Constant(1, 1, sigma2), xhs);
    MatrixXd want = sigma2 * b * b.transpose();  // cos^2(0) = 1
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("intervention_reduction: closed form and additivity") {
    LinearSystemSpec spec = dual_spec();
    MatrixXd red = intervention_reduction(spec.interventions[0].B, spec.interventions[0].Sigma);
    CHECK(red(0, 0) == doctest::Approx(0.5));
    CHECK(red(1, 1) == doctest::Approx(0.0));

    CHECK(intervention_reduction(spec.interventions[0].B, MatrixXd::Zero(1, 1))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    // floor(all) - floor(all minus j) == reduction(j), exactly.
    MatrixXd all = floor_self_stim(spec.interventions);
    MatrixXd minus0 = floor_self_stim({spec.interventions[1]});
    CHECK((all - minus0 - red).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("floor_forecaster: closed forms") {
    MatrixXd I2 = MatrixXd::Identity(2, 2);
    MatrixXd got = floor_forecaster(MatrixXd::Zero(2, 2), I2, 0.5 * I2);
    CHECK((got - 0.5 * I2).cwiseAbs().maxCoeff() == 0.0);

    MatrixXd sw = 0.2 * I2;
    CHECK((floor_forecaster(sw, I2, MatrixXd::Zero(2, 2)) - sw).cwiseAbs().maxCoeff() == 0.0);
}

// [DERIVED] simulation oracle: a perfect linear model fed noisy interventions
// reproduces Sigma_w + B Sigma_uhat B^T.
TEST_CASE("floor_forecaster: Monte Carlo reproduction within 3%") {
    Rng rng(99);
    MatrixXd A = 0.5 * MatrixXd::Identity(2, 2);
    MatrixXd B(2, 2);
    B << 1.0, 0.3, -0.2, 0.9;
    MatrixXd Sigma_u = MatrixXd::Identity(2, 2);
    MatrixXd Sigma_uhat = 0.4 * MatrixXd::Identity(2, 2);
    MatrixXd Sigma_w = 0.1 * MatrixXd::Identity(2, 2);
    MatrixXd chol_uhat = linalg::cholesky_psd(Sigma_uhat);
    MatrixXd chol_w = linalg::cholesky_psd(Sigma_w);

    const int n = 400000;
    MatrixXd err(n, 2);
    for (int i = 0; i < n; ++i) {
        VectorXd xh = linalg::sample_standard_normal(2, rng);
        VectorXd u = linalg::sample_standard_normal(2, rng);
        VectorXd w = chol_w * linalg::sample_standard_normal(2, rng);
        VectorXd xf = A * xh + B * u + w;
        VectorXd uhat = u + chol_uhat * linalg::sample_standard_normal(2, rng);
        VectorXd pred = A * xh + B * uhat;
        err.row(i) = (xf - pred).transpose();
    }
    MatrixXd mc = linalg::sample_covariance(err);
    MatrixXd want = floor_forecaster(Sigma_w, B, Sigma_uhat);
    CHECK(linalg::frobenius(mc - want) / linalg::frobenius(want) < 0.03);
}

TEST_CASE("floor_weight_sharing: two-channel case study") {
    MatrixXd C(2, 1);
    C << 1.0, 2.0;
    const double v = 1.7;  // Var(Z_h)
    WeightSharingFloor ws = floor_weight_sharing(C, MatrixXd::Constant(1, 1, v));
    CHECK(ws.c_opt(0) == doctest::Approx(1.5));
    // (C - 1 c_opt) = [-0.5; 0.5], so the floor is (v/4) [[1,-1],[-1,1]].
    CHECK(ws.floor(0, 0) == doctest::Approx(v / 4));
    CHECK(ws.floor(1, 1) == doctest::Approx(v / 4));
    CHECK(ws.floor(0, 1) == doctest::Approx(-v / 4));
}

TEST_CASE("floor_weight_sharing: identical rows give zero floor") {
    MatrixXd C(3, 2);
    C << 1, 2, 1, 2, 1, 2;
    WeightSharingFloor ws = floor_weight_sharing(C, MatrixXd::Identity(2, 2));
    CHECK(ws.floor.cwiseAbs().maxCoeff() == 0.0);
}

// [DERIVED] scalar optimization oracle: finite-difference gradient descent on
// trace((C - 1c) Sigma (C - 1c)^T) over the shared weight c.
TEST_CASE("floor_weight_sharing: c_opt matches numerical trace minimization") {
    Rng rng(12);
    MatrixXd C = MatrixXd::NullaryExpr(4, 3, [&] { return rng.normal(); });
    MatrixXd root = MatrixXd::NullaryExpr(3, 3, [&] { return 0.4 * rng.normal(); });
    MatrixXd Sigma = root * root.transpose() + 0.1 * MatrixXd::Identity(3, 3);
    WeightSharingFloor ws = floor_weight_sharing(C, Sigma);

    auto objective = [&](const Eigen::RowVectorXd& c) {
        MatrixXd dev = C.rowwise() - c;
        return (dev * Sigma * dev.transpose()).trace();
    };
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(3);
    const double h = 1e-6, lr = 0.05;
    for (int it = 0; it < 4000; ++it) {
        Eigen::RowVectorXd g(3);
        for (int j = 0; j < 3; ++j) {
            Eigen::RowVectorXd cp = c, cm = c;
            cp(j) += h;
            cm(j) -= h;
            g(j) = (objective(cp) - objective(cm)) / (2 * h);
        }
        c -= lr * g;
    }
    CHECK((c - ws.c_opt).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("floor_partial_observation: closed forms") {
    LinearSystemSpec spec = dual_spec();
    MatrixXd I2 = MatrixXd::Identity(2, 2);

    // Full observability with no hidden covariance falls back to the
    // self-stimulation floor.
    MatrixXd full = floor_partial_observation(I2, spec.A, spec.interventions,
                                              MatrixXd::Zero(2, 2));
    CHECK((full - floor_self_stim(spec.interventions)).cwiseAbs().maxCoeff() < 1e-14);

    // No interventions: only the hidden-state term remains.
    std::vector<Intervention> noB = spec.interventions;
    noB[0].Sigma.setZero();
    noB[1].Sigma.setZero();
    MatrixXd cov_hidden(2, 2);
    cov_hidden << 0, 0, 0, 1;
    MatrixXd H(1, 2);
    H << 1, 0;
    MatrixXd ha = H * spec.A;
    MatrixXd hidden_only = floor_partial_observation(H, spec.A, noB, cov_hidden);
    CHECK((hidden_only - ha * cov_hidden * ha.transpose()).cwiseAbs().maxCoeff() < 1e-14);

    // H = [1,0], A = 0.8 I, hidden cov diag(0,1): 0.5 + 0 = 0.5.
    MatrixXd scalar_floor = floor_partial_observation(H, spec.A, spec.interventions, cov_hidden);
    CHECK(scalar_floor(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("fit_ols_self_stim: recovers A and B mu on the dual system") {
    LinearDataset ds = simulate_linear(dual_spec(), 200000, 404);
    OLSFit fit = fit_ols_self_stim(ds.xh, ds.xf);
    CHECK((fit.C - 0.8 * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.01);
    CHECK(fit.d_vec.cwiseAbs().maxCoeff() <= 0.01);
    // Residual covariance approaches the self-stimulation floor.
    CHECK(fit.residual_cov(0, 0) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(fit.residual_cov(1, 1) == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("fit_ols_self_stim: exact recovery of a noiseless system") {
    LinearSystemSpec spec = dual_spec();
    spec.interventions[0].Sigma.setZero();
    spec.interventions[1].Sigma.setZero();
    LinearDataset ds = simulate_linear(spec, 500, 7);
    OLSFit fit = fit_ols_self_stim(ds.xh, ds.xf);
    CHECK((fit.C - 0.8 * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.residual_cov.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fit_ols_self_stim: intercept recovers B mu") {
    LinearDataset ds = simulate_linear(dual_spec(/*mu1=*/2.0), 100000, 11);
    OLSFit fit = fit_ols_self_stim(ds.xh, ds.xf);
    CHECK(fit.d_vec(0) == doctest::Approx(2.0).epsilon(0.02));
    CHECK(fit.d_vec(1) == doctest::Approx(0.0).epsilon(0.02));
}

TEST_CASE("fit_ols_intervention_aware: conditioning on U1 removes its floor") {
    LinearDataset ds = simulate_linear(dual_spec(), 200000, 505);
    OLSFit aware = fit_ols_intervention_aware(ds.xh, ds.xf, {ds.u[0]});
    CHECK(aware.residual_cov(0, 0) <= 0.01);
    CHECK(aware.residual_cov(1, 1) == doctest::Approx(0.3).epsilon(0.03));

    // All interventions observed and Sigma_w = 0: fully determined system.
    OLSFit full = fit_ols_intervention_aware(ds.xh, ds.xf, {ds.u[0], ds.u[1]});
    CHECK(full.residual_cov.cwiseAbs().maxCoeff() <= 1e-3);

    // [DERIVED] MC difference oracle for the reduction identity.
    OLSFit self = fit_ols_self_stim(ds.xh, ds.xf);
    MatrixXd diff = self.residual_cov - aware.residual_cov;
    MatrixXd red = intervention_reduction(dual_spec().interventions[0].B,
                                          dual_spec().interventions[0].Sigma);
    CHECK(linalg::frobenius(diff - red) / linalg::frobenius(red) < 0.05);
}

TEST_CASE("fit_ols: singular design raises a conditioning error") {
    MatrixXd xh = MatrixXd::Zero(100, 2);  // constant column, collinear with intercept
    MatrixXd xf = MatrixXd::Zero(100, 2);
    CHECK_THROWS_AS(fit_ols_self_stim(xh, xf), ConditioningError);
}

TEST_CASE("verify_floor: equality, slack, and violation") {
    MatrixXd f = MatrixXd::Identity(2, 2);
    FloorReport eq = verify_floor(f, f, 0.01);
    CHECK(eq.gap_min_eig == doctest::Approx(0.0));
    CHECK(eq.pass);

    FloorReport above = verify_floor(f + 0.1 * MatrixXd::Identity(2, 2), f, 0.01);
    CHECK(above.gap_min_eig == doctest::Approx(0.1));
    CHECK(above.pass);

    FloorReport below = verify_floor(f - 0.1 * MatrixXd::Identity(2, 2), f, 0.01);
    CHECK_FALSE(below.pass);

    CHECK_THROWS_AS(verify_floor(f, MatrixXd::Zero(3, 3), 0.1), DimensionError);
}

TEST_CASE("floor outputs are symmetric PSD for random specs") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_int(4));
        std::vector<Intervention> ivs;
        int k = 1 + static_cast<int>(rng.uniform_int(3));
        for (int j = 0; j < k; ++j) {
            ivs.push_back(random_intervention(rng, n, 1 + static_cast<int>(rng.uniform_int(2))));
        }
        MatrixXd floor = floor_self_stim(ivs);
        CHECK((floor - floor.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(linalg::min_eigenvalue(floor) >= -1e-10);

        // Additivity over the set.
        MatrixXd acc = MatrixXd::Zero(n, n);
        for (const Intervention& iv : ivs) acc += floor_self_stim({iv});
        CHECK((acc - floor).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

// Oracle equivalence: for random linear specs, the MC-estimated OLS residual
// covariance sits above the closed-form floor within MC tolerance.
TEST_CASE("random specs: OLS residual covariance respects the floor") {
    Rng rng(777);
    for (int trial = 0; trial < 5; ++trial) {
        int n = 2 + static_cast<int>(rng.uniform_int(3));
        LinearSystemSpec spec;
        spec.A = MatrixXd::NullaryExpr(n, n, [&] { return 0.3 * rng.normal(); });
        int k = 1 + static_cast<int>(rng.uniform_int(2));
        for (int j = 0; j < k; ++j) {
            spec.interventions.push_back(
                random_intervention(rng, n, 1 + static_cast<int>(rng.uniform_int(2))));
        }
        spec.Sigma_w = MatrixXd::Zero(n, n);
        const int N = 50000;
        LinearDataset ds = simulate_linear(spec, N, 1000 + trial);
        OLSFit fit = fit_ols_self_stim(ds.xh, ds.xf);
        MatrixXd floor = floor_self_stim(spec.interventions);
        double tol = 5.0 * linalg::frobenius(floor) / std::sqrt(static_cast<double>(N));
        FloorReport rep = verify_floor(fit.residual_cov, floor, tol);
        CHECK(rep.pass);
    }
}

// Conditioning monotonicity: observing any subset of interventions can only
// shrink the residual covariance (up to MC noise).
TEST_CASE("conditioning monotonicity over intervention subsets") {
    const int N = 100000;
    LinearDataset ds = simulate_linear(dual_spec(), N, 31337);
    OLSFit self = fit_ols_self_stim(ds.xh, ds.xf);
    const double tol = 5.0 * linalg::frobenius(self.residual_cov) / std::sqrt(N);
    std::vector<std::vector<int>> subsets = {{0}, {1}, {0, 1}};
    for (const auto& subset : subsets) {
        std::vector<MatrixXd> obs;
        for (int j : subset) obs.push_back(ds.u[j]);
        OLSFit aware = fit_ols_intervention_aware(ds.xh, ds.xf, obs);
        CHECK(linalg::min_eigenvalue(self.residual_cov - aware.residual_cov) >= -tol);
    }
}

TEST_CASE("FloorReport serializes to JSON") {
    MatrixXd f = MatrixXd::Identity(2, 2);
    FloorReport rep = verify_floor(f, f, 0.01);
    std::string j = rep.to_json("unit");
    CHECK(j.find("\"verdict\": \"pass\"") != std::string::npos);
    CHECK(j.find("\"gap_min_eig\"") != std::string::npos);
}
