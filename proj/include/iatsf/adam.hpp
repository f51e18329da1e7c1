#pragma once

#include <cstdint>
#include <vector>

#include "iatsf/tensor.hpp"

namespace iatsf {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter first/second moment buffers plus a step counter; the usual
/// bias-corrected update.
class AdamState {
public:
    AdamState(const std::vector<Tensor>& params, AdamConfig config);

    /// One update using each parameter's populated grad buffer.
    void step(std::vector<Tensor>& params);

    int64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return config_; }

    // Exposed for exact training resumption.
    std::vector<std::vector<double>>& moment1() { return m_; }
    std::vector<std::vector<double>>& moment2() { return v_; }
    void set_step_count(int64_t t) { step_count_ = t; }

private:
    AdamConfig config_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    int64_t step_count_ = 0;
};

/// Free-function form: applies one Adam update to params in place.
void adam_step(std::vector<Tensor>& params, AdamState& state);

}  // namespace iatsf
