#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "iatsf/errors.hpp"
#include "iatsf/rng.hpp"

namespace iatsf {

using Shape = std::vector<size_t>;

size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated on demand, same length as data
    bool requires_grad = false;
    uint64_t tape_id = 0;  // id of the graph that produced this node (0 = leaf)

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

}  // namespace detail

/// Dense n-dimensional 64-bit float array, row-major, value semantics with a
/// shared buffer. Setting grad_enabled on a leaf makes it a trainable
/// parameter: after Graph::backward its grad() holds d loss / d leaf.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool grad_enabled = false);
    static Tensor full(Shape shape, double value, bool grad_enabled = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool grad_enabled = false);
    static Tensor scalar(double value, bool grad_enabled = false);
    /// Uniform in [-bound, bound]; bound = sqrt(1 / fan_in) when bound <= 0.
    static Tensor rand_uniform(Shape shape, Rng& rng, double bound, bool grad_enabled = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    size_t ndim() const { return impl_->shape.size(); }
    size_t size() const { return impl_->data.size(); }

    // 2-D helpers (a 1-D tensor counts as a single row).
    size_t rows() const;
    size_t cols() const;

    double* data() { return impl_->data.data(); }
    const double* data() const { return impl_->data.data(); }
    std::vector<double>& vec() { return impl_->data; }
    const std::vector<double>& vec() const { return impl_->data; }

    double& at(size_t i) { return impl_->data[i]; }
    double at(size_t i) const { return impl_->data[i]; }
    double& operator()(size_t r, size_t c) { return impl_->data[r * cols() + c]; }
    double operator()(size_t r, size_t c) const { return impl_->data[r * cols() + c]; }
    double item() const;

    bool grad_enabled() const { return impl_ && impl_->requires_grad; }
    void set_grad_enabled(bool enabled) { impl_->requires_grad = enabled; }

    /// Gradient buffer; throws if backward has not populated it.
    const std::vector<double>& grad() const;
    std::vector<double>& grad_buffer();
    bool has_grad() const { return impl_ && impl_->grad.size() == impl_->data.size(); }
    void zero_grad();

    /// Deep copy of values (no graph linkage, grads not copied).
    Tensor clone() const;

    void check_finite(const char* what) const;

    std::shared_ptr<detail::TensorImpl> impl_;

private:
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
    static Tensor make(Shape shape);
    friend class Graph;
    friend Tensor make_op_output(Shape shape);
};

/// Reverse-mode tape. One Graph is active per thread (RAII); operations on
/// grad-enabled tensors append their backprop closures in execution order.
/// backward() replays the tape once in reverse and then marks the graph
/// consumed: a second backward without a fresh forward throws.
class Graph {
public:
    Graph();
    ~Graph();
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    void backward(const Tensor& loss);

    static Graph* current();

    void record(std::function<void()> fn) { tape_.push_back(std::move(fn)); }
    uint64_t id() const { return id_; }
    bool consumed() const { return consumed_; }
    size_t num_ops() const { return tape_.size(); }

private:
    std::vector<std::function<void()>> tape_;
    uint64_t id_;
    bool consumed_ = false;
    Graph* prev_ = nullptr;
};

/// When enabled, every primitive verifies its output is finite and raises a
/// ValidationError on NaN/Inf.
void set_debug_checks(bool enabled);
bool debug_checks_enabled();

}  // namespace iatsf
