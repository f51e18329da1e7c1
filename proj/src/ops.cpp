#include "iatsf/ops.hpp"

#include <algorithm>
#include <cmath>

namespace iatsf {

extern Tensor make_op_output(Shape shape);

namespace {

using detail::TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;

bool tracking(std::initializer_list<const Tensor*> inputs) {
    if (!Graph::current()) return false;
    for (const Tensor* t : inputs) {
        if (t->grad_enabled()) return true;
    }
    return false;
}

void mark(Tensor& out) {
    out.impl_->requires_grad = true;
    out.impl_->tape_id = Graph::current()->id();
}

void finite_check(const Tensor& t, const char* what) {
    if (debug_checks_enabled()) t.check_finite(what);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
}

// Interprets mask as row-broadcastable over an [rows x cols] grid; returns the
// mask row stride (0 when a single mask row applies to every score row).
size_t mask_row_stride(const Tensor& mask, size_t rows, size_t cols, const char* op) {
    if (mask.cols() != cols) {
        throw DimensionError(std::string(op) + ": mask has " + std::to_string(mask.cols()) +
                             " columns, scores have " + std::to_string(cols));
    }
    if (mask.rows() == rows) return cols;
    if (mask.rows() == 1) return 0;
    throw DimensionError(std::string(op) + ": mask not broadcastable to scores");
}

void softmax_backward(const ImplPtr& xi, const ImplPtr& oi, size_t rows, size_t cols) {
    oi->ensure_grad();
    xi->ensure_grad();
    for (size_t i = 0; i < rows; ++i) {
        const double* y = oi->data.data() + i * cols;
        const double* g = oi->grad.data() + i * cols;
        double dot = 0.0;
        for (size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
        double* dx = xi->grad.data() + i * cols;
        for (size_t j = 0; j < cols; ++j) dx[j] += y[j] * (g[j] - dot);
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    const size_t m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
    if (k != k2) {
        throw DimensionError("matmul: inner dimensions disagree " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }
    Tensor out = make_op_output({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        double* orow = po + i * n;
        for (size_t kk = 0; kk < k; ++kk) {
            const double aik = arow[kk];
            const double* brow = pb + kk * n;
            for (size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
    finite_check(out, "matmul");
    if (tracking({&a, &b})) {
        mark(out);
        ImplPtr ai = a.impl_, bi = b.impl_, oi = out.impl_;
        Graph::current()->record([ai, bi, oi, m, k, n] {
            oi->ensure_grad();
            const double* g = oi->grad.data();
            if (ai->requires_grad) {
                ai->ensure_grad();
                // dA = g * B^T
                for (size_t i = 0; i < m; ++i) {
                    const double* grow = g + i * n;
                    double* darow = ai->grad.data() + i * k;
                    for (size_t kk = 0; kk < k; ++kk) {
                        const double* brow = bi->data.data() + kk * n;
                        double acc = 0.0;
                        for (size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                        darow[kk] += acc;
                    }
                }
            }
            if (bi->requires_grad) {
                bi->ensure_grad();
                // dB = A^T * g
                for (size_t i = 0; i < m; ++i) {
                    const double* arow = ai->data.data() + i * k;
                    const double* grow = g + i * n;
                    for (size_t kk = 0; kk < k; ++kk) {
                        const double aik = arow[kk];
                        double* dbrow = bi->grad.data() + kk * n;
                        for (size_t j = 0; j < n; ++j) dbrow[j] += aik * grow[j];
                    }
                }
            }
        });
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    const size_t m = a.rows(), n = a.cols();
    Tensor out = make_op_output({n, m});
    const double* pa = a.data();
    double* po = out.data();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) po[j * m + i] = pa[i * n + j];
    if (tracking({&a})) {
        mark(out);
        ImplPtr ai = a.impl_, oi = out.impl_;
        Graph::current()->record([ai, oi, m, n] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < n; ++j) ai->grad[i * n + j] += oi->grad[j * m + i];
        });
    }
    return out;
}

namespace {

template <typename Fwd, typename BwdA, typename BwdB>
Tensor binary_elementwise(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, BwdA ga,
                          BwdB gb) {
    require_same_shape(a, b, name);
    Tensor out = make_op_output(a.shape());
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) out.at(i) = fwd(a.at(i), b.at(i));
    finite_check(out, name);
    if (tracking({&a, &b})) {
        mark(out);
        ImplPtr ai = a.impl_, bi = b.impl_, oi = out.impl_;
        Graph::current()->record([ai, bi, oi, n, ga, gb] {
            oi->ensure_grad();
            if (ai->requires_grad) {
                ai->ensure_grad();
                for (size_t i = 0; i < n; ++i)
                    ai->grad[i] += ga(oi->grad[i], ai->data[i], bi->data[i]);
            }
            if (bi->requires_grad) {
                bi->ensure_grad();
                for (size_t i = 0; i < n; ++i)
                    bi->grad[i] += gb(oi->grad[i], ai->data[i], bi->data[i]);
            }
        });
    }
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double g, double, double) { return g; }, [](double g, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double g, double, double) { return g; }, [](double g, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double g, double, double y) { return g * y; },
        [](double g, double x, double) { return g * x; });
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = make_op_output(a.shape());
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) out.at(i) = a.at(i) * s;
    finite_check(out, "scale");
    if (tracking({&a})) {
        mark(out);
        ImplPtr ai = a.impl_, oi = out.impl_;
        Graph::current()->record([ai, oi, n, s] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            for (size_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i] * s;
        });
    }
    return out;
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
    const size_t m = a.rows(), n = a.cols();
    if (v.size() != n) {
        throw DimensionError("add_rowvec: vector length " + std::to_string(v.size()) +
                             " vs row width " + std::to_string(n));
    }
    Tensor out = make_op_output(a.shape());
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) out.at(i * n + j) = a.at(i * n + j) + v.at(j);
    finite_check(out, "add_rowvec");
    if (tracking({&a, &v})) {
        mark(out);
        ImplPtr ai = a.impl_, vi = v.impl_, oi = out.impl_;
        Graph::current()->record([ai, vi, oi, m, n] {
            oi->ensure_grad();
            if (ai->requires_grad) {
                ai->ensure_grad();
                for (size_t i = 0; i < m * n; ++i) ai->grad[i] += oi->grad[i];
            }
            if (vi->requires_grad) {
                vi->ensure_grad();
                for (size_t i = 0; i < m; ++i)
                    for (size_t j = 0; j < n; ++j) vi->grad[j] += oi->grad[i * n + j];
            }
        });
    }
    return out;
}

Tensor gelu(const Tensor& a) {
    Tensor out = make_op_output(a.shape());
    const size_t n = a.size();
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    for (size_t i = 0; i < n; ++i) {
        double x = a.at(i);
        out.at(i) = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
    }
    finite_check(out, "gelu");
    if (tracking({&a})) {
        mark(out);
        ImplPtr ai = a.impl_, oi = out.impl_;
        Graph::current()->record([ai, oi, n] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            constexpr double inv_sqrt2pi = 0.3989422804014326779;
            for (size_t i = 0; i < n; ++i) {
                double x = ai->data[i];
                double cdf = 0.5 * (1.0 + std::erf(x * 0.7071067811865475244));
                double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
                ai->grad[i] += oi->grad[i] * (cdf + x * pdf);
            }
        });
    }
    return out;
}

Tensor softmax(const Tensor& x, int axis) {
    const size_t nd = x.ndim();
    if (nd == 0 || x.size() == 0) throw DimensionError("softmax: empty tensor");
    int last = static_cast<int>(nd) - 1;
    if (axis < 0) axis += static_cast<int>(nd);
    if (axis != last) {
        throw DimensionError("softmax: only the last axis is supported; got axis " +
                             std::to_string(axis));
    }
    const size_t cols = x.cols();
    const size_t rows = x.size() / cols;
    if (cols == 0) throw DimensionError("softmax: empty axis");
    Tensor out = make_op_output(x.shape());
    for (size_t i = 0; i < rows; ++i) {
        const double* xr = x.data() + i * cols;
        double* yr = out.data() + i * cols;
        double mx = xr[0];
        for (size_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
        double s = 0.0;
        for (size_t j = 0; j < cols; ++j) {
            yr[j] = std::exp(xr[j] - mx);
            s += yr[j];
        }
        for (size_t j = 0; j < cols; ++j) yr[j] /= s;
    }
    finite_check(out, "softmax");
    if (tracking({&x})) {
        mark(out);
        ImplPtr xi = x.impl_, oi = out.impl_;
        Graph::current()->record([xi, oi, rows, cols] {
            if (!xi->requires_grad) return;
            softmax_backward(xi, oi, rows, cols);
        });
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    if (eps <= 0.0) throw ValidationError("layer_norm: eps must be positive");
    const size_t cols = x.cols();
    const size_t rows = x.size() / cols;
    if (gain.size() != cols || bias.size() != cols) {
        throw DimensionError("layer_norm: gain/bias length must equal last axis size " +
                             std::to_string(cols));
    }
    Tensor out = make_op_output(x.shape());
    std::vector<double> mu(rows), inv_sigma(rows);
    for (size_t i = 0; i < rows; ++i) {
        const double* xr = x.data() + i * cols;
        double m = 0.0;
        for (size_t j = 0; j < cols; ++j) m += xr[j];
        m /= static_cast<double>(cols);
        double v = 0.0;
        for (size_t j = 0; j < cols; ++j) v += (xr[j] - m) * (xr[j] - m);
        v /= static_cast<double>(cols);
        mu[i] = m;
        inv_sigma[i] = 1.0 / std::sqrt(v + eps);
        double* yr = out.data() + i * cols;
        for (size_t j = 0; j < cols; ++j) {
            yr[j] = gain.at(j) * (xr[j] - m) * inv_sigma[i] + bias.at(j);
        }
    }
    finite_check(out, "layer_norm");
    if (tracking({&x, &gain, &bias})) {
        mark(out);
        ImplPtr xi = x.impl_, gi = gain.impl_, bi = bias.impl_, oi = out.impl_;
        Graph::current()->record([xi, gi, bi, oi, rows, cols, mu, inv_sigma] {
            oi->ensure_grad();
            const double cn = static_cast<double>(cols);
            for (size_t i = 0; i < rows; ++i) {
                const double* xr = xi->data.data() + i * cols;
                const double* g = oi->grad.data() + i * cols;
                const double is = inv_sigma[i];
                if (gi->requires_grad || bi->requires_grad) {
                    if (gi->requires_grad) gi->ensure_grad();
                    if (bi->requires_grad) bi->ensure_grad();
                    for (size_t j = 0; j < cols; ++j) {
                        double xhat = (xr[j] - mu[i]) * is;
                        if (gi->requires_grad) gi->grad[j] += g[j] * xhat;
                        if (bi->requires_grad) bi->grad[j] += g[j];
                    }
                }
                if (xi->requires_grad) {
                    xi->ensure_grad();
                    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                    for (size_t j = 0; j < cols; ++j) {
                        double xhat = (xr[j] - mu[i]) * is;
                        double dxhat = g[j] * gi->data[j];
                        sum_dxhat += dxhat;
                        sum_dxhat_xhat += dxhat * xhat;
                    }
                    double* dx = xi->grad.data() + i * cols;
                    for (size_t j = 0; j < cols; ++j) {
                        double xhat = (xr[j] - mu[i]) * is;
                        double dxhat = g[j] * gi->data[j];
                        dx[j] += is * (dxhat - sum_dxhat / cn - xhat * sum_dxhat_xhat / cn);
                    }
                }
            }
        });
    }
    return out;
}

Tensor masked_fill(const Tensor& scores, const Tensor& mask, double value) {
    const size_t cols = scores.cols();
    const size_t rows = scores.size() / cols;
    const size_t stride = mask_row_stride(mask, rows, cols, "masked_fill");
    Tensor out = make_op_output(scores.shape());
    for (size_t i = 0; i < rows; ++i) {
        const double* sr = scores.data() + i * cols;
        const double* mr = mask.data() + i * stride;
        double* yr = out.data() + i * cols;
        for (size_t j = 0; j < cols; ++j) yr[j] = (mr[j] != 0.0) ? value : sr[j];
    }
    if (tracking({&scores})) {
        mark(out);
        ImplPtr si = scores.impl_, mi = mask.impl_, oi = out.impl_;
        Graph::current()->record([si, mi, oi, rows, cols, stride] {
            if (!si->requires_grad) return;
            oi->ensure_grad();
            si->ensure_grad();
            for (size_t i = 0; i < rows; ++i) {
                const double* mr = mi->data.data() + i * stride;
                for (size_t j = 0; j < cols; ++j) {
                    if (mr[j] == 0.0) si->grad[i * cols + j] += oi->grad[i * cols + j];
                }
            }
        });
    }
    return out;
}

Tensor masked_softmax(const Tensor& scores, const Tensor& mask) {
    const size_t cols = scores.cols();
    const size_t rows = scores.size() / cols;
    const size_t stride = mask_row_stride(mask, rows, cols, "masked_softmax");
    Tensor out = make_op_output(scores.shape());
    for (size_t i = 0; i < rows; ++i) {
        const double* sr = scores.data() + i * cols;
        const double* mr = mask.data() + i * stride;
        double* yr = out.data() + i * cols;
        double mx = kMaskValue;
        size_t valid = 0;
        for (size_t j = 0; j < cols; ++j) {
            if (mr[j] == 0.0) {
                mx = valid == 0 ? sr[j] : std::max(mx, sr[j]);
                ++valid;
            }
        }
        if (valid == 0) {
            throw ValidationError("masked_softmax: row " + std::to_string(i) +
                                  " has no unmasked key");
        }
        double s = 0.0;
        for (size_t j = 0; j < cols; ++j) {
            if (mr[j] == 0.0) {
                yr[j] = std::exp(sr[j] - mx);
                s += yr[j];
            } else {
                yr[j] = 0.0;
            }
        }
        for (size_t j = 0; j < cols; ++j) yr[j] /= s;
    }
    finite_check(out, "masked_softmax");
    if (tracking({&scores})) {
        mark(out);
        ImplPtr si = scores.impl_, oi = out.impl_;
        Graph::current()->record([si, oi, rows, cols] {
            if (!si->requires_grad) return;
            // Masked outputs are exactly 0, so the plain softmax backward
            // contributes nothing at masked positions.
            softmax_backward(si, oi, rows, cols);
        });
    }
    return out;
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    require_same_shape(pred, target, "mse_loss");
    const size_t n = pred.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = pred.at(i) - target.at(i);
        acc += d * d;
    }
    Tensor out = make_op_output({1});
    out.at(0) = acc / static_cast<double>(n);
    finite_check(out, "mse_loss");
    if (tracking({&pred, &target})) {
        mark(out);
        ImplPtr pi = pred.impl_, ti = target.impl_, oi = out.impl_;
        Graph::current()->record([pi, ti, oi, n] {
            oi->ensure_grad();
            const double g = oi->grad[0] * 2.0 / static_cast<double>(n);
            if (pi->requires_grad) {
                pi->ensure_grad();
                for (size_t i = 0; i < n; ++i) pi->grad[i] += g * (pi->data[i] - ti->data[i]);
            }
            if (ti->requires_grad) {
                ti->ensure_grad();
                for (size_t i = 0; i < n; ++i) ti->grad[i] -= g * (pi->data[i] - ti->data[i]);
            }
        });
    }
    return out;
}

Tensor sum(const Tensor& x) {
    const size_t n = x.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += x.at(i);
    Tensor out = make_op_output({1});
    out.at(0) = acc;
    if (tracking({&x})) {
        mark(out);
        ImplPtr xi = x.impl_, oi = out.impl_;
        Graph::current()->record([xi, oi, n] {
            if (!xi->requires_grad) return;
            oi->ensure_grad();
            xi->ensure_grad();
            for (size_t i = 0; i < n; ++i) xi->grad[i] += oi->grad[0];
        });
    }
    return out;
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    const size_t n = a.cols();
    if (b.cols() != n) {
        throw DimensionError("concat_rows: column mismatch " + std::to_string(n) + " vs " +
                             std::to_string(b.cols()));
    }
    const size_t ma = a.rows(), mb = b.rows();
    Tensor out = make_op_output({ma + mb, n});
    std::copy(a.data(), a.data() + ma * n, out.data());
    std::copy(b.data(), b.data() + mb * n, out.data() + ma * n);
    if (tracking({&a, &b})) {
        mark(out);
        ImplPtr ai = a.impl_, bi = b.impl_, oi = out.impl_;
        Graph::current()->record([ai, bi, oi, ma, mb, n] {
            oi->ensure_grad();
            if (ai->requires_grad) {
                ai->ensure_grad();
                for (size_t i = 0; i < ma * n; ++i) ai->grad[i] += oi->grad[i];
            }
            if (bi->requires_grad) {
                bi->ensure_grad();
                for (size_t i = 0; i < mb * n; ++i) bi->grad[i] += oi->grad[ma * n + i];
            }
        });
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const size_t m = parts[0].rows();
    size_t total = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != m) throw DimensionError("concat_cols: row mismatch");
        total += p.cols();
    }
    Tensor out = make_op_output({m, total});
    size_t off = 0;
    for (const Tensor& p : parts) {
        const size_t pc = p.cols();
        for (size_t i = 0; i < m; ++i)
            std::copy(p.data() + i * pc, p.data() + (i + 1) * pc, out.data() + i * total + off);
        off += pc;
    }
    bool track = false;
    if (Graph::current()) {
        for (const Tensor& p : parts) track = track || p.grad_enabled();
    }
    if (track) {
        mark(out);
        std::vector<ImplPtr> impls;
        impls.reserve(parts.size());
        for (const Tensor& p : parts) impls.push_back(p.impl_);
        ImplPtr oi = out.impl_;
        Graph::current()->record([impls, oi, m, total] {
            oi->ensure_grad();
            size_t off = 0;
            for (const ImplPtr& pi : impls) {
                const size_t pc = pi->data.size() / m;
                if (pi->requires_grad) {
                    pi->ensure_grad();
                    for (size_t i = 0; i < m; ++i)
                        for (size_t j = 0; j < pc; ++j)
                            pi->grad[i * pc + j] += oi->grad[i * total + off + j];
                }
                off += pc;
            }
        });
    }
    return out;
}

Tensor slice_rows(const Tensor& a, size_t r0, size_t r1) {
    const size_t m = a.rows(), n = a.cols();
    if (r0 > r1 || r1 > m) throw DimensionError("slice_rows: bad range");
    Tensor out = make_op_output({r1 - r0, n});
    std::copy(a.data() + r0 * n, a.data() + r1 * n, out.data());
    if (tracking({&a})) {
        mark(out);
        ImplPtr ai = a.impl_, oi = out.impl_;
        Graph::current()->record([ai, oi, r0, r1, n] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            for (size_t i = 0; i < (r1 - r0) * n; ++i) ai->grad[r0 * n + i] += oi->grad[i];
        });
    }
    return out;
}

Tensor slice_cols(const Tensor& a, size_t c0, size_t c1) {
    const size_t m = a.rows(), n = a.cols();
    if (c0 > c1 || c1 > n) throw DimensionError("slice_cols: bad range");
    const size_t w = c1 - c0;
    Tensor out = make_op_output({m, w});
    for (size_t i = 0; i < m; ++i)
        std::copy(a.data() + i * n + c0, a.data() + i * n + c1, out.data() + i * w);
    if (tracking({&a})) {
        mark(out);
        ImplPtr ai = a.impl_, oi = out.impl_;
        Graph::current()->record([ai, oi, m, n, c0, w] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < w; ++j) ai->grad[i * n + c0 + j] += oi->grad[i * w + j];
        });
    }
    return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.size()) {
        throw DimensionError("reshape: numel mismatch " + shape_str(a.shape()) + " -> " +
                             shape_str(shape));
    }
    Tensor out = make_op_output(std::move(shape));
    std::copy(a.data(), a.data() + a.size(), out.data());
    if (tracking({&a})) {
        mark(out);
        ImplPtr ai = a.impl_, oi = out.impl_;
        const size_t n = a.size();
        Graph::current()->record([ai, oi, n] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            for (size_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i];
        });
    }
    return out;
}

Tensor patchify(const Tensor& channel_series, size_t patch_len, size_t stride) {
    if (channel_series.ndim() == 2 && channel_series.cols() != 1) {
        throw DimensionError("patchify: expected a single channel column");
    }
    const size_t length = channel_series.size();
    if (patch_len == 0 || stride == 0) throw ValidationError("patchify: zero patch/stride");
    if (length < patch_len) {
        throw DimensionError("patchify: series shorter than patch length");
    }
    std::vector<size_t> starts;
    for (size_t s = 0; s + patch_len <= length; s += stride) starts.push_back(s);
    if (starts.back() + patch_len < length) starts.push_back(length - patch_len);

    Tensor out = make_op_output({starts.size(), patch_len});
    for (size_t p = 0; p < starts.size(); ++p) {
        std::copy(channel_series.data() + starts[p], channel_series.data() + starts[p] + patch_len,
                  out.data() + p * patch_len);
    }
    if (tracking({&channel_series})) {
        mark(out);
        ImplPtr ai = channel_series.impl_, oi = out.impl_;
        Graph::current()->record([ai, oi, starts, patch_len] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            for (size_t p = 0; p < starts.size(); ++p)
                for (size_t j = 0; j < patch_len; ++j)
                    ai->grad[starts[p] + j] += oi->grad[p * patch_len + j];
        });
    }
    return out;
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw ValidationError("dropout: p must be in [0, 1)");
    if (p == 0.0) return a;
    const size_t n = a.size();
    std::vector<double> keep(n);
    const double inv = 1.0 / (1.0 - p);
    for (size_t i = 0; i < n; ++i) keep[i] = (rng.uniform() >= p) ? inv : 0.0;
    Tensor out = make_op_output(a.shape());
    for (size_t i = 0; i < n; ++i) out.at(i) = a.at(i) * keep[i];
    if (tracking({&a})) {
        mark(out);
        ImplPtr ai = a.impl_, oi = out.impl_;
        Graph::current()->record([ai, oi, n, keep = std::move(keep)] {
            if (!ai->requires_grad) return;
            oi->ensure_grad();
            ai->ensure_grad();
            for (size_t i = 0; i < n; ++i) ai->grad[i] += oi->grad[i] * keep[i];
        });
    }
    return out;
}

void backward(const Tensor& loss) {
    Graph* g = Graph::current();
    if (!g) throw ValidationError("backward: no active graph");
    g->backward(loss);
}

}  // namespace iatsf
