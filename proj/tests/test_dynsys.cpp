#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "iatsf/fm_toy.hpp"
#include "iatsf/linear_system.hpp"

using namespace iatsf;
using linalg::MatrixXd;
using linalg::VectorXd;

namespace {

// The dual-intervention system used across the closed-form case studies.
LinearSystemSpec dual_intervention_spec(double sigma_w = 0.0) {
    LinearSystemSpec spec;
    spec.A = 0.8 * MatrixXd::Identity(2, 2);
    Intervention i1, i2;
    i1.B = MatrixXd(2, 1);
    i1.B << 1, 0;
    i1.mu = VectorXd::Zero(1);
    i1.Sigma = MatrixXd::Constant(1, 1, 0.5);
    i2.B = MatrixXd(2, 1);
    i2.B << 0, 1;
    i2.mu = VectorXd::Zero(1);
    i2.Sigma = MatrixXd::Constant(1, 1, 0.3);
    spec.interventions = {i1, i2};
    spec.Sigma_w = sigma_w * MatrixXd::Identity(2, 2);
    return spec;
}

// Brute-force DFT magnitude at integer bin k over [begin, end).
double dft_mag(const std::vector<double>& x, size_t begin, size_t end, size_t k) {
    std::complex<double> acc(0, 0);
    const size_t n = end - begin;
    for (size_t i = 0; i < n; ++i) {
        double angle = -2.0 * M_PI * static_cast<double>(k * i) / static_cast<double>(n);
        acc += x[begin + i] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return std::abs(acc);
}

}  // namespace

TEST_CASE("simulate_linear: intervention covariance matches spec (200k draws)") {
    LinearDataset ds = simulate_linear(dual_intervention_spec(), 200000, 17);
    // Sigma_w = 0 so xf - A xh isolates B1 U1 + B2 U2.
    MatrixXd drive = ds.xf - ds.xh * (0.8 * MatrixXd::Identity(2, 2)).transpose();
    MatrixXd cov = linalg::sample_covariance(drive);
    CHECK(cov(0, 0) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(cov(1, 1) == doctest::Approx(0.3).epsilon(0.03));
    CHECK(std::fabs(cov(0, 1)) < 0.01);
}

TEST_CASE("simulate_linear: degenerate noise is exactly deterministic") {
    LinearSystemSpec spec = dual_intervention_spec();
    spec.interventions[0].Sigma.setZero();
    spec.interventions[1].Sigma.setZero();
    spec.interventions[0].mu << 2.0;
    LinearDataset ds = simulate_linear(spec, 100, 3);
    for (int i = 0; i < 100; ++i) {
        VectorXd expect = 0.8 * ds.xh.row(i).transpose();
        expect(0) += 2.0;
        CHECK((ds.xf.row(i).transpose() - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("simulate_linear: empirical intervention mean obeys LLN bound") {
    // [DERIVED] 4 sigma / sqrt(N) bound on the sample mean deviation.
    LinearSystemSpec spec = dual_intervention_spec();
    spec.interventions[0].mu << 1.5;
    const int n = 50000;
    LinearDataset ds = simulate_linear(spec, n, 29);
    double bound1 = 4.0 * std::sqrt(0.5) / std::sqrt(static_cast<double>(n));
    double bound2 = 4.0 * std::sqrt(0.3) / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(ds.u[0].mean() - 1.5) <= bound1);
    CHECK(std::fabs(ds.u[1].mean() - 0.0) <= bound2);
}

TEST_CASE("simulate_linear: non-PSD covariance rejected") {
    LinearSystemSpec spec = dual_intervention_spec();
    spec.interventions[0].Sigma << -0.5;
    CHECK_THROWS_AS(simulate_linear(spec, 10, 1), ValidationError);
}

TEST_CASE("simulate_linear: history independent of interventions") {
    LinearDataset ds = simulate_linear(dual_intervention_spec(), 100000, 41);
    MatrixXd u_all(100000, 2);
    u_all.col(0) = ds.u[0].col(0);
    u_all.col(1) = ds.u[1].col(0);
    MatrixXd cross = linalg::sample_cross_covariance(ds.xh, u_all);
    CHECK(cross.cwiseAbs().maxCoeff() <= 4.0 / std::sqrt(100000.0));
}

TEST_CASE("observe: identity and coordinate projection") {
    MatrixXd states(3, 2);
    states << 1, 2, 3, 4, 5, 6;
    CHECK((observe(states, MatrixXd::Identity(2, 2)) - states).cwiseAbs().maxCoeff() == 0.0);
    MatrixXd H(1, 2);
    H << 1, 0;
    MatrixXd obs = observe(states, H);
    CHECK(obs(0, 0) == 1);
    CHECK(obs(2, 0) == 5);
    MatrixXd bad(1, 3);
    bad.setZero();
    CHECK_THROWS_AS(observe(states, bad), DimensionError);
}

TEST_CASE("fm toy: caption texts are exact") {
    FMToyConfig cfg;
    cfg.n_steps = 2000;
    cfg.frequency_set = {5.0};
    cfg.seed = 7;
    FmTrajectory traj = generate_fm_toy(cfg);
    REQUIRE(!traj.changes.empty());
    const size_t c = traj.changes[0].step;
    CHECK(traj.events[c - 3].text == "Channel 1 will change to frequency 5 in 3 timesteps.");
    CHECK(traj.events[c + 1].text == "Channel 1 will keep steady with frequency of 5.");
    // A step far from any change.
    CHECK(traj.events[c - cfg.pre_captions - 5].text == "The waveform will go steady.");
}

TEST_CASE("fm toy: phase-continuous analytic sinusoid within segments") {
    FMToyConfig cfg;
    cfg.n_steps = 3000;
    cfg.seed = 11;
    FmTrajectory traj = generate_fm_toy(cfg);
    REQUIRE(traj.changes.size() >= 2);
    for (size_t s = 0; s + 1 < traj.changes.size(); ++s) {
        const size_t begin = traj.changes[s].step;
        const size_t end = traj.changes[s + 1].step;
        const double f = traj.changes[s].frequency;
        const double phase0 = traj.phases[begin];
        for (size_t t = begin; t < end; ++t) {
            double analytic =
                cfg.amplitude * std::sin(phase0 + 2.0 * M_PI * f * static_cast<double>(t - begin));
            CHECK(std::fabs(traj.values[t] - analytic) <= 1e-12);
        }
    }
}

TEST_CASE("fm toy: bounded by amplitude, per-segment DFT peak at configured frequency") {
    FMToyConfig cfg;
    cfg.n_steps = 4000;
    cfg.amplitude = 2.5;
    cfg.seed = 13;
    FmTrajectory traj = generate_fm_toy(cfg);
    for (double v : traj.values) CHECK(std::fabs(v) <= cfg.amplitude + 1e-12);

    for (size_t s = 0; s + 1 < std::min<size_t>(traj.changes.size(), 6); ++s) {
        const size_t begin = traj.changes[s].step;
        const size_t end = traj.changes[s + 1].step;
        const size_t n = end - begin;
        size_t best_k = 1;
        double best = 0.0;
        for (size_t k = 1; k <= n / 2; ++k) {
            double m = dft_mag(traj.values, begin, end, k);
            if (m > best) {
                best = m;
                best_k = k;
            }
        }
        double peak_freq = static_cast<double>(best_k) / static_cast<double>(n);
        CHECK(std::fabs(peak_freq - traj.changes[s].frequency) <= 1.0 / static_cast<double>(n));
    }
}

TEST_CASE("fm toy: events cover every step in order") {
    FMToyConfig cfg;
    cfg.n_steps = 500;
    cfg.seed = 3;
    FmTrajectory traj = generate_fm_toy(cfg);
    REQUIRE(traj.events.size() == cfg.n_steps);
    for (size_t t = 0; t < cfg.n_steps; ++t) {
        CHECK(traj.events[t].timestamp == static_cast<int64_t>(t));
    }
}

TEST_CASE("fm toy: config validation") {
    FMToyConfig cfg;
    cfg.segment_min = 9;  // not > pre_captions
    cfg.segment_max = 20;
    CHECK_THROWS_AS(generate_fm_toy(cfg), ValidationError);
    FMToyConfig cfg2;
    cfg2.frequency_set = {-0.1};
    CHECK_THROWS_AS(generate_fm_toy(cfg2), ValidationError);
}

TEST_CASE("render_fm_future reproduces the recorded trajectory") {
    FMToyConfig cfg;
    cfg.n_steps = 1500;
    cfg.seed = 23;
    FmTrajectory traj = generate_fm_toy(cfg);
    const size_t t0 = 700, h = 120;
    std::vector<FmChange> window_changes;
    for (const FmChange& c : traj.changes) {
        if (c.step >= t0 && c.step < t0 + h) window_changes.push_back(c);
    }
    std::vector<double> oracle =
        render_fm_future(traj, t0, h, traj.frequencies[t0 - 1], window_changes);
    for (size_t i = 0; i < h; ++i) {
        CHECK(oracle[i] == doctest::Approx(traj.values[t0 + i]).epsilon(1e-12));
    }
}

TEST_CASE("fm toy: identical seeds give identical trajectories") {
    FMToyConfig cfg;
    cfg.n_steps = 1000;
    cfg.seed = 77;
    FmTrajectory a = generate_fm_toy(cfg);
    FmTrajectory b = generate_fm_toy(cfg);
    CHECK(a.values == b.values);
    CHECK(a.changes.size() == b.changes.size());
    for (size_t i = 0; i < a.events.size(); ++i) CHECK(a.events[i].text == b.events[i].text);
}
