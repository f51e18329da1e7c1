#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "iatsf/tensor.hpp"

namespace iatsf::testutil {

/// Central finite-difference gradient of a scalar function with respect to
/// one flat coordinate of a tensor.
inline double numeric_grad(const std::function<double()>& f, Tensor& x, size_t i,
                           double h = 1e-5) {
    const double orig = x.at(i);
    x.at(i) = orig + h;
    const double fp = f();
    x.at(i) = orig - h;
    const double fm = f();
    x.at(i) = orig;
    return (fp - fm) / (2.0 * h);
}

inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max(std::fabs(a) + std::fabs(b), 1e-4);
}

/// Max relative error between analytic gradients (populated in inputs) and
/// central finite differences of `f` over every coordinate of every input.
inline double max_grad_rel_err(const std::function<double()>& f, std::vector<Tensor> inputs,
                               double h = 1e-5) {
    double worst = 0.0;
    for (Tensor& x : inputs) {
        const std::vector<double> analytic = x.grad();
        for (size_t i = 0; i < x.size(); ++i) {
            const double num = numeric_grad(f, x, i, h);
            worst = std::max(worst, rel_err(analytic[i], num));
        }
    }
    return worst;
}

}  // namespace iatsf::testutil
