#include "iatsf/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace iatsf {

namespace {
thread_local Graph* g_current_graph = nullptr;
std::atomic<uint64_t> g_next_graph_id{1};
bool g_debug_checks = false;
}  // namespace

void set_debug_checks(bool enabled) { g_debug_checks = enabled; }
bool debug_checks_enabled() { return g_debug_checks; }

size_t shape_numel(const Shape& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor Tensor::make(Shape shape) {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data.assign(shape_numel(impl->shape), 0.0);
    return Tensor(std::move(impl));
}

Tensor make_op_output(Shape shape) { return Tensor::make(std::move(shape)); }

Tensor Tensor::zeros(Shape shape, bool grad_enabled) {
    Tensor t = make(std::move(shape));
    t.impl_->requires_grad = grad_enabled;
    return t;
}

Tensor Tensor::full(Shape shape, double value, bool grad_enabled) {
    Tensor t = make(std::move(shape));
    std::fill(t.impl_->data.begin(), t.impl_->data.end(), value);
    t.impl_->requires_grad = grad_enabled;
    return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool grad_enabled) {
    if (shape_numel(shape) != data.size()) {
        throw DimensionError("from_data: shape " + shape_str(shape) + " does not match data length " +
                             std::to_string(data.size()));
    }
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = grad_enabled;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool grad_enabled) {
    return from_data({1}, {value}, grad_enabled);
}

Tensor Tensor::rand_uniform(Shape shape, Rng& rng, double bound, bool grad_enabled) {
    Tensor t = make(std::move(shape));
    if (bound <= 0.0) {
        size_t fan_in = t.impl_->shape.empty() ? 1 : t.impl_->shape[0];
        bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    }
    for (double& v : t.impl_->data) v = (2.0 * rng.uniform() - 1.0) * bound;
    t.impl_->requires_grad = grad_enabled;
    return t;
}

size_t Tensor::rows() const { return ndim() >= 2 ? impl_->shape[0] : 1; }

size_t Tensor::cols() const {
    if (ndim() == 0) return 0;
    return impl_->shape[ndim() - 1];
}

double Tensor::item() const {
    if (size() != 1) throw DimensionError("item: tensor has " + std::to_string(size()) + " elements");
    return impl_->data[0];
}

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) throw ValidationError("grad: gradient not populated; run backward first");
    return impl_->grad;
}

std::vector<double>& Tensor::grad_buffer() {
    impl_->ensure_grad();
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (impl_->grad.size() == impl_->data.size()) {
        std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
    }
}

Tensor Tensor::clone() const {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = impl_->shape;
    impl->data = impl_->data;
    impl->requires_grad = impl_->requires_grad;
    return Tensor(std::move(impl));
}

void Tensor::check_finite(const char* what) const {
    for (double v : impl_->data) {
        if (!std::isfinite(v)) {
            throw ValidationError(std::string("non-finite value in ") + what);
        }
    }
}

Graph::Graph() : id_(g_next_graph_id.fetch_add(1)) {
    prev_ = g_current_graph;
    g_current_graph = this;
}

Graph::~Graph() { g_current_graph = prev_; }

Graph* Graph::current() { return g_current_graph; }

void Graph::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw DimensionError("backward: loss must be a scalar tensor");
    }
    if (consumed_) {
        throw ValidationError("backward: graph already consumed; run a new forward pass");
    }
    if (!loss.grad_enabled() || loss.impl_->tape_id != id_) {
        throw ValidationError("backward: loss was not produced within this live graph");
    }
    loss.impl_->ensure_grad();
    loss.impl_->grad[0] = 1.0;
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
    consumed_ = true;
}

}  // namespace iatsf
