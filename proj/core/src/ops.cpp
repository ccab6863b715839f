#include "codinet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace codinet {

namespace {

using detail::TensorData;
using DataPtr = std::shared_ptr<TensorData>;

bool wants_grad(std::initializer_list<const Tensor*> inputs) {
    if (!Graph::recording()) return false;
    for (const Tensor* t : inputs)
        if (t->requires_grad()) return true;
    return false;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
}

std::span<const double> out_grad(const DataPtr& out) { return out->grad; }

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> v(a.value().begin(), a.value().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.value()[i];
    Tensor out = make_op_output(a.shape(), std::move(v));
    if (wants_grad({&a, &b})) {
        auto ad = a.data_ptr(), bd = b.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, bd, od] {
            detail::accumulate_grad(ad, out_grad(od));
            detail::accumulate_grad(bd, out_grad(od));
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    std::vector<double> v(a.value().begin(), a.value().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b.value()[i];
    Tensor out = make_op_output(a.shape(), std::move(v));
    if (wants_grad({&a, &b})) {
        auto ad = a.data_ptr(), bd = b.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, bd, od] {
            detail::accumulate_grad(ad, out_grad(od));
            detail::accumulate_grad_scaled(bd, out_grad(od), -1.0);
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> v(a.value().begin(), a.value().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= b.value()[i];
    Tensor out = make_op_output(a.shape(), std::move(v));
    if (wants_grad({&a, &b})) {
        auto ad = a.data_ptr(), bd = b.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, bd, od] {
            const auto& g = od->grad;
            if (ad->requires_grad) {
                if (ad->grad.empty()) ad->grad.assign(ad->value.size(), 0.0);
                for (std::size_t i = 0; i < g.size(); ++i) ad->grad[i] += g[i] * bd->value[i];
            }
            if (bd->requires_grad) {
                if (bd->grad.empty()) bd->grad.assign(bd->value.size(), 0.0);
                for (std::size_t i = 0; i < g.size(); ++i) bd->grad[i] += g[i] * ad->value[i];
            }
        });
    }
    return out;
}

Tensor add_scalar(const Tensor& a, double c) {
    std::vector<double> v(a.value().begin(), a.value().end());
    for (double& x : v) x += c;
    Tensor out = make_op_output(a.shape(), std::move(v));
    if (wants_grad({&a})) {
        auto ad = a.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, od] { detail::accumulate_grad(ad, out_grad(od)); });
    }
    return out;
}

Tensor mul_scalar(const Tensor& a, double c) {
    std::vector<double> v(a.value().begin(), a.value().end());
    for (double& x : v) x *= c;
    Tensor out = make_op_output(a.shape(), std::move(v));
    if (wants_grad({&a})) {
        auto ad = a.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, od, c] { detail::accumulate_grad_scaled(ad, out_grad(od), c); });
    }
    return out;
}

Tensor log_elem(const Tensor& a) {
    std::vector<double> v(a.value().begin(), a.value().end());
    for (double& x : v) {
        if (!(x > 0.0)) throw UsageError("log_elem requires strictly positive entries");
        x = std::log(x);
    }
    Tensor out = make_op_output(a.shape(), std::move(v));
    if (wants_grad({&a})) {
        auto ad = a.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, od] {
            if (!ad->requires_grad) return;
            if (ad->grad.empty()) ad->grad.assign(ad->value.size(), 0.0);
            for (std::size_t i = 0; i < od->grad.size(); ++i)
                ad->grad[i] += od->grad[i] / ad->value[i];
        });
    }
    return out;
}

Tensor add_const_vec(const Tensor& a, const std::vector<double>& c) {
    if (c.size() != static_cast<std::size_t>(a.size()))
        throw ShapeError("add_const_vec: constant length does not match tensor size");
    std::vector<double> v(a.value().begin(), a.value().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += c[i];
    Tensor out = make_op_output(a.shape(), std::move(v));
    if (wants_grad({&a})) {
        auto ad = a.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, od] { detail::accumulate_grad(ad, out_grad(od)); });
    }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2)
        throw ShapeError("matmul requires 2-d tensors");
    const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), p = b.dim(1);
    if (k != k2)
        throw ShapeError("matmul: inner extents differ, " + shape_str(a.shape()) + " * " +
                         shape_str(b.shape()));
    std::vector<double> v(static_cast<std::size_t>(m) * p, 0.0);
    const double* av = a.value().data();
    const double* bv = b.value().data();
    for (int i = 0; i < m; ++i)
        for (int l = 0; l < k; ++l) {
            const double ail = av[i * k + l];
            const double* brow = bv + l * p;
            double* orow = v.data() + i * p;
            for (int j = 0; j < p; ++j) orow[j] += ail * brow[j];
        }
    Tensor out = make_op_output({m, p}, std::move(v));
    if (wants_grad({&a, &b})) {
        auto ad = a.data_ptr(), bd = b.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, bd, od, m, k, p] {
            const auto& g = od->grad;
            if (ad->requires_grad) { // dA = G * B^T
                if (ad->grad.empty()) ad->grad.assign(ad->value.size(), 0.0);
                for (int i = 0; i < m; ++i)
                    for (int l = 0; l < k; ++l) {
                        double s = 0.0;
                        const double* grow = g.data() + i * p;
                        const double* brow = bd->value.data() + l * p;
                        for (int j = 0; j < p; ++j) s += grow[j] * brow[j];
                        ad->grad[i * k + l] += s;
                    }
            }
            if (bd->requires_grad) { // dB = A^T * G
                if (bd->grad.empty()) bd->grad.assign(bd->value.size(), 0.0);
                for (int l = 0; l < k; ++l)
                    for (int i = 0; i < m; ++i) {
                        const double ail = ad->value[i * k + l];
                        const double* grow = g.data() + i * p;
                        double* brow = bd->grad.data() + l * p;
                        for (int j = 0; j < p; ++j) brow[j] += ail * grow[j];
                    }
            }
        });
    }
    return out;
}

Tensor conv2d(const Tensor& x, const Tensor& kernel) {
    if (x.shape().size() != 3) throw ShapeError("conv2d input must be [C,H,W]");
    if (kernel.shape().size() != 4 || kernel.dim(2) != 3 || kernel.dim(3) != 3)
        throw ShapeError("conv2d kernel must be [C_out,C_in,3,3]");
    const int ci = x.dim(0), h = x.dim(1), w = x.dim(2);
    const int co = kernel.dim(0);
    if (kernel.dim(1) != ci)
        throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                         " input channels, tensor has " + std::to_string(ci));

    std::vector<double> v(static_cast<std::size_t>(co) * h * w, 0.0);
    const double* xv = x.value().data();
    const double* kv = kernel.value().data();
    for (int o = 0; o < co; ++o)
        for (int c = 0; c < ci; ++c) {
            const double* kplane = kv + ((o * ci + c) * 9);
            const double* xplane = xv + c * h * w;
            double* oplane = v.data() + o * h * w;
            for (int y = 0; y < h; ++y)
                for (int p = 0; p < 3; ++p) {
                    const int sy = y + p - 1;
                    if (sy < 0 || sy >= h) continue;
                    const double* xrow = xplane + sy * w;
                    double* orow = oplane + y * w;
                    const double* krow = kplane + p * 3;
                    for (int q = 0; q < 3; ++q) {
                        const double kw = krow[q];
                        if (kw == 0.0) continue;
                        const int dx = q - 1;
                        const int x0 = std::max(0, -dx);
                        const int x1 = std::min(w, w - dx);
                        for (int xx = x0; xx < x1; ++xx) orow[xx] += kw * xrow[xx + dx];
                    }
                }
        }
    Tensor out = make_op_output({co, h, w}, std::move(v));
    if (wants_grad({&x, &kernel})) {
        auto xd = x.data_ptr(), kd = kernel.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [xd, kd, od, ci, co, h, w] {
            const auto& g = od->grad;
            if (xd->requires_grad) {
                if (xd->grad.empty()) xd->grad.assign(xd->value.size(), 0.0);
                for (int o = 0; o < co; ++o)
                    for (int c = 0; c < ci; ++c) {
                        const double* kplane = kd->value.data() + ((o * ci + c) * 9);
                        const double* gplane = g.data() + o * h * w;
                        double* xg = xd->grad.data() + c * h * w;
                        for (int y = 0; y < h; ++y)
                            for (int p = 0; p < 3; ++p) {
                                const int sy = y + p - 1;
                                if (sy < 0 || sy >= h) continue;
                                const double* grow = gplane + y * w;
                                double* xrow = xg + sy * w;
                                for (int q = 0; q < 3; ++q) {
                                    const double kw = kplane[p * 3 + q];
                                    if (kw == 0.0) continue;
                                    const int dx = q - 1;
                                    const int x0 = std::max(0, -dx);
                                    const int x1 = std::min(w, w - dx);
                                    for (int xx = x0; xx < x1; ++xx) xrow[xx + dx] += kw * grow[xx];
                                }
                            }
                    }
            }
            if (kd->requires_grad) {
                if (kd->grad.empty()) kd->grad.assign(kd->value.size(), 0.0);
                for (int o = 0; o < co; ++o)
                    for (int c = 0; c < ci; ++c) {
                        double* kg = kd->grad.data() + ((o * ci + c) * 9);
                        const double* gplane = g.data() + o * h * w;
                        const double* xplane = xd->value.data() + c * h * w;
                        for (int p = 0; p < 3; ++p)
                            for (int q = 0; q < 3; ++q) {
                                const int dy = p - 1, dx = q - 1;
                                double s = 0.0;
                                const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
                                const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                                for (int y = y0; y < y1; ++y) {
                                    const double* grow = gplane + y * w;
                                    const double* xrow = xplane + (y + dy) * w;
                                    for (int xx = x0; xx < x1; ++xx) s += grow[xx] * xrow[xx + dx];
                                }
                                kg[p * 3 + q] += s;
                            }
                    }
            }
        });
    }
    return out;
}

Tensor add_channel_bias(const Tensor& x, const Tensor& b) {
    if (x.shape().size() != 3) throw ShapeError("add_channel_bias input must be [C,H,W]");
    if (b.shape().size() != 1 || b.dim(0) != x.dim(0))
        throw ShapeError("add_channel_bias: bias must be [C] with C = " + std::to_string(x.dim(0)));
    const int c = x.dim(0), hw = x.dim(1) * x.dim(2);
    std::vector<double> v(x.value().begin(), x.value().end());
    for (int ch = 0; ch < c; ++ch) {
        const double bias = b.value()[ch];
        for (int i = 0; i < hw; ++i) v[ch * hw + i] += bias;
    }
    Tensor out = make_op_output(x.shape(), std::move(v));
    if (wants_grad({&x, &b})) {
        auto xd = x.data_ptr(), bd = b.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [xd, bd, od, c, hw] {
            detail::accumulate_grad(xd, out_grad(od));
            if (bd->requires_grad) {
                if (bd->grad.empty()) bd->grad.assign(bd->value.size(), 0.0);
                for (int ch = 0; ch < c; ++ch) {
                    double s = 0.0;
                    for (int i = 0; i < hw; ++i) s += od->grad[ch * hw + i];
                    bd->grad[ch] += s;
                }
            }
        });
    }
    return out;
}

Tensor relu(const Tensor& x) {
    std::vector<double> v(x.value().begin(), x.value().end());
    for (double& e : v) e = e > 0.0 ? e : 0.0;
    Tensor out = make_op_output(x.shape(), std::move(v));
    if (wants_grad({&x})) {
        auto xd = x.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [xd, od] {
            if (!xd->requires_grad) return;
            if (xd->grad.empty()) xd->grad.assign(xd->value.size(), 0.0);
            // Subgradient at exactly 0 is 0.
            for (std::size_t i = 0; i < od->grad.size(); ++i)
                if (xd->value[i] > 0.0) xd->grad[i] += od->grad[i];
        });
    }
    return out;
}

Tensor global_avg_pool(const Tensor& x) {
    if (x.shape().size() != 3) throw ShapeError("global_avg_pool input must be [C,H,W]");
    const int c = x.dim(0), hw = x.dim(1) * x.dim(2);
    std::vector<double> v(static_cast<std::size_t>(c), 0.0);
    for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int i = 0; i < hw; ++i) s += x.value()[ch * hw + i];
        v[ch] = s / hw;
    }
    Tensor out = make_op_output({c}, std::move(v));
    if (wants_grad({&x})) {
        auto xd = x.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [xd, od, c, hw] {
            if (!xd->requires_grad) return;
            if (xd->grad.empty()) xd->grad.assign(xd->value.size(), 0.0);
            const double inv = 1.0 / hw;
            for (int ch = 0; ch < c; ++ch) {
                const double g = od->grad[ch] * inv;
                for (int i = 0; i < hw; ++i) xd->grad[ch * hw + i] += g;
            }
        });
    }
    return out;
}

Tensor softmax(const Tensor& logits) {
    if (logits.shape().size() != 1) throw ShapeError("softmax input must be 1-d");
    const auto lv = logits.value();
    double mx = lv[0];
    for (double v : lv) mx = std::max(mx, v);
    std::vector<double> v(lv.size());
    double z = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
        v[i] = std::exp(lv[i] - mx);
        z += v[i];
    }
    for (double& e : v) e /= z;
    Tensor out = make_op_output(logits.shape(), std::move(v));
    if (wants_grad({&logits})) {
        auto ld = logits.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ld, od] {
            if (!ld->requires_grad) return;
            if (ld->grad.empty()) ld->grad.assign(ld->value.size(), 0.0);
            double dotv = 0.0;
            for (std::size_t i = 0; i < od->grad.size(); ++i) dotv += od->grad[i] * od->value[i];
            for (std::size_t i = 0; i < od->grad.size(); ++i)
                ld->grad[i] += od->value[i] * (od->grad[i] - dotv);
        });
    }
    return out;
}

Tensor cross_entropy(const Tensor& logits, int label) {
    if (logits.shape().size() != 1) throw ShapeError("cross_entropy logits must be 1-d");
    const int k = logits.dim(0);
    if (label < 0 || label >= k)
        throw UsageError("cross_entropy label " + std::to_string(label) + " out of range [0," +
                         std::to_string(k) + ")");
    const auto lv = logits.value();
    double mx = lv[0];
    for (double v : lv) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : lv) z += std::exp(v - mx);
    const double loss = std::log(z) + mx - lv[static_cast<std::size_t>(label)];
    Tensor out = make_op_output({1}, {loss});
    if (wants_grad({&logits})) {
        auto ld = logits.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ld, od, label, mx, z] {
            if (!ld->requires_grad) return;
            if (ld->grad.empty()) ld->grad.assign(ld->value.size(), 0.0);
            const double g = od->grad[0];
            for (std::size_t i = 0; i < ld->value.size(); ++i) {
                double p = std::exp(ld->value[i] - mx) / z;
                if (static_cast<int>(i) == label) p -= 1.0;
                ld->grad[i] += g * p;
            }
        });
    }
    return out;
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.value()) s += v;
    Tensor out = make_op_output({1}, {s});
    if (wants_grad({&a})) {
        auto ad = a.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, od] {
            if (!ad->requires_grad) return;
            if (ad->grad.empty()) ad->grad.assign(ad->value.size(), 0.0);
            for (double& g : ad->grad) g += od->grad[0];
        });
    }
    return out;
}

Tensor dot(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.value().size(); ++i) s += a.value()[i] * b.value()[i];
    Tensor out = make_op_output({1}, {s});
    if (wants_grad({&a, &b})) {
        auto ad = a.data_ptr(), bd = b.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, bd, od] {
            const double g = od->grad[0];
            if (ad->requires_grad) {
                if (ad->grad.empty()) ad->grad.assign(ad->value.size(), 0.0);
                for (std::size_t i = 0; i < ad->grad.size(); ++i) ad->grad[i] += g * bd->value[i];
            }
            if (bd->requires_grad) {
                if (bd->grad.empty()) bd->grad.assign(bd->value.size(), 0.0);
                for (std::size_t i = 0; i < bd->grad.size(); ++i) bd->grad[i] += g * ad->value[i];
            }
        });
    }
    return out;
}

Tensor select(const Tensor& a, int index) {
    if (a.shape().size() != 1) throw ShapeError("select input must be 1-d");
    if (index < 0 || index >= a.dim(0)) throw UsageError("select index out of range");
    Tensor out = make_op_output({1}, {a.value()[static_cast<std::size_t>(index)]});
    if (wants_grad({&a})) {
        auto ad = a.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, od, index] {
            if (!ad->requires_grad) return;
            if (ad->grad.empty()) ad->grad.assign(ad->value.size(), 0.0);
            ad->grad[static_cast<std::size_t>(index)] += od->grad[0];
        });
    }
    return out;
}

Tensor stack_scalars(const std::vector<Tensor>& scalars) {
    if (scalars.empty()) throw UsageError("stack_scalars: empty list");
    std::vector<double> v;
    v.reserve(scalars.size());
    bool any_grad = false;
    for (const Tensor& t : scalars) {
        if (t.size() != 1) throw ShapeError("stack_scalars: every element must be scalar");
        v.push_back(t.item());
        any_grad = any_grad || t.requires_grad();
    }
    Tensor out = make_op_output({static_cast<int>(scalars.size())}, std::move(v));
    if (Graph::recording() && any_grad) {
        std::vector<DataPtr> ins;
        ins.reserve(scalars.size());
        for (const Tensor& t : scalars) ins.push_back(t.data_ptr());
        auto od = out.data_ptr();
        Graph::active()->record(od, [ins, od] {
            for (std::size_t i = 0; i < ins.size(); ++i)
                detail::accumulate_grad(ins[i], std::span<const double>(&od->grad[i], 1));
        });
    }
    return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.size())
        throw ShapeError("reshape: element count changes from " + shape_str(a.shape()) + " to " +
                         shape_str(shape));
    std::vector<double> v(a.value().begin(), a.value().end());
    Tensor out = make_op_output(std::move(shape), std::move(v));
    if (wants_grad({&a})) {
        auto ad = a.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [ad, od] { detail::accumulate_grad(ad, out_grad(od)); });
    }
    return out;
}

Tensor scale_by(const Tensor& x, const Tensor& s) {
    if (s.size() != 1) throw ShapeError("scale_by: scale must be a scalar tensor");
    const double sv = s.item();
    std::vector<double> v(x.value().begin(), x.value().end());
    for (double& e : v) e *= sv;
    Tensor out = make_op_output(x.shape(), std::move(v));
    if (wants_grad({&x, &s})) {
        auto xd = x.data_ptr(), sd = s.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [xd, sd, od, sv] {
            detail::accumulate_grad_scaled(xd, out_grad(od), sv);
            if (sd->requires_grad) {
                if (sd->grad.empty()) sd->grad.assign(1, 0.0);
                double g = 0.0;
                for (std::size_t i = 0; i < od->grad.size(); ++i) g += od->grad[i] * xd->value[i];
                sd->grad[0] += g;
            }
        });
    }
    return out;
}

Tensor one_minus(const Tensor& v) {
    if (v.size() != 1) throw ShapeError("one_minus expects a scalar tensor");
    Tensor out = make_op_output({1}, {1.0 - v.item()});
    if (wants_grad({&v})) {
        auto vd = v.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [vd, od] { detail::accumulate_grad_scaled(vd, out_grad(od), -1.0); });
    }
    return out;
}

Tensor straight_through_round(const Tensor& v) {
    if (v.size() != 1) throw ShapeError("straight_through_round expects a scalar tensor");
    Tensor out = make_op_output({1}, {v.item() >= 0.5 ? 1.0 : 0.0});
    if (wants_grad({&v})) {
        auto vd = v.data_ptr(), od = out.data_ptr();
        Graph::active()->record(od, [vd, od] { detail::accumulate_grad(vd, out_grad(od)); });
    }
    return out;
}

Tensor hinge_sq_over(const Tensor& sq_dist, double margin) {
    if (sq_dist.size() != 1) throw ShapeError("hinge_sq_over expects a scalar tensor");
    const double sq = sq_dist.item();
    const double d = std::sqrt(std::max(sq, 0.0));
    const double excess = d - margin;
    const double h = excess > 0.0 ? excess * excess : 0.0;
    Tensor out = make_op_output({1}, {h});
    if (wants_grad({&sq_dist})) {
        auto sd = sq_dist.data_ptr(), od = out.data_ptr();
        // d h / d sq = (d - m)/d on the active side; d > m >= 0 there.
        const double slope = excess > 0.0 && d > 0.0 ? excess / d : 0.0;
        Graph::active()->record(od, [sd, od, slope] {
            detail::accumulate_grad_scaled(sd, out_grad(od), slope);
        });
    }
    return out;
}

Tensor hinge_sq_under(const Tensor& sq_dist, double margin) {
    if (sq_dist.size() != 1) throw ShapeError("hinge_sq_under expects a scalar tensor");
    const double sq = sq_dist.item();
    const double d = std::sqrt(std::max(sq, 0.0));
    const double gap = margin - d;
    const double h = gap > 0.0 ? gap * gap : 0.0;
    Tensor out = make_op_output({1}, {h});
    if (wants_grad({&sq_dist})) {
        auto sd = sq_dist.data_ptr(), od = out.data_ptr();
        // Symmetric subgradient 0 at the cone point d == 0.
        const double slope = gap > 0.0 && d > 1e-12 ? -gap / d : 0.0;
        Graph::active()->record(od, [sd, od, slope] {
            detail::accumulate_grad_scaled(sd, out_grad(od), slope);
        });
    }
    return out;
}

Tensor mean_of(const std::vector<Tensor>& tensors) {
    if (tensors.empty()) throw UsageError("mean_of: empty list");
    Tensor acc = tensors.front();
    for (std::size_t i = 1; i < tensors.size(); ++i) {
        check_same_shape(acc, tensors[i], "mean_of");
        acc = add(acc, tensors[i]);
    }
    return mul_scalar(acc, 1.0 / static_cast<double>(tensors.size()));
}

double finite_diff_check(const std::function<Tensor()>& f, const std::vector<Tensor>& params,
                         double h) {
    // Analytic gradients.
    std::vector<std::vector<double>> analytic;
    {
        for (Tensor p : params) p.zero_grad();
        Graph g;
        Tensor loss = f();
        g.backward(loss);
        for (const Tensor& p : params) {
            auto gr = p.grad();
            analytic.emplace_back(gr.begin(), gr.end());
        }
    }

    auto eval = [&f]() {
        GradPause pause;
        return f().item();
    };

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi];
        auto vals = p.mutable_value();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double orig = vals[i];
            vals[i] = orig + h;
            const double up = eval();
            vals[i] = orig - h;
            const double down = eval();
            vals[i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic[pi][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::fabs(a - numeric) / denom);
        }
    }
    return max_rel;
}

} // namespace codinet
