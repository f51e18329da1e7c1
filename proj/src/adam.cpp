#include "iatsf/adam.hpp"

#include <cmath>

namespace iatsf {

AdamState::AdamState(const std::vector<Tensor>& params, AdamConfig config) : config_(config) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor& p : params) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void AdamState::step(std::vector<Tensor>& params) {
    if (params.size() != m_.size()) {
        throw DimensionError("adam_step: parameter count changed since state creation");
    }
    ++step_count_;
    const double t = static_cast<double>(step_count_);
    const double bc1 = 1.0 - std::pow(config_.beta1, t);
    const double bc2 = 1.0 - std::pow(config_.beta2, t);
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = params[pi];
        if (p.size() != m_[pi].size()) {
            throw DimensionError("adam_step: parameter " + std::to_string(pi) + " shape changed");
        }
        const std::vector<double>& g = p.grad();
        std::vector<double>& m = m_[pi];
        std::vector<double>& v = v_[pi];
        double* w = p.data();
        for (size_t i = 0; i < m.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

void adam_step(std::vector<Tensor>& params, AdamState& state) { state.step(params); }

}  // namespace iatsf
