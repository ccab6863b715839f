#include "codinet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace codinet {

namespace {
thread_local Graph* tl_active = nullptr;
thread_local int tl_pause_depth = 0;

const std::vector<double>& zero_buffer(std::size_t n) {
    thread_local std::vector<double> buf;
    if (buf.size() < n) buf.assign(n, 0.0);
    return buf;
}
} // namespace

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (int e : shape) {
        if (e <= 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
        n *= e;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto n = shape_numel(shape);
    auto d = std::make_shared<detail::TensorData>();
    d->shape = std::move(shape);
    d->value.assign(static_cast<std::size_t>(n), 0.0);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::full(Shape shape, double fill, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.d_->value) v = fill;
    return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
    auto n = shape_numel(shape);
    if (static_cast<std::size_t>(n) != data.size())
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    auto d = std::make_shared<detail::TensorData>();
    d->shape = std::move(shape);
    d->value = std::move(data);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from({1}, {v}, requires_grad);
}

std::span<const double> Tensor::grad() const {
    if (d_->grad.empty()) return zero_buffer(d_->value.size());
    return d_->grad;
}

void Tensor::zero_grad() { d_->grad.clear(); }

double Tensor::item() const {
    if (size() != 1) throw UsageError("item() requires a one-element tensor, shape is " + shape_str(shape()));
    return d_->value[0];
}

bool Tensor::all_finite() const noexcept {
    for (double v : d_->value)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor make_op_output(Shape shape, std::vector<double> data) {
    return Tensor::from(std::move(shape), std::move(data));
}

Graph::Graph() {
    prev_ = tl_active;
    tl_active = this;
}

Graph::~Graph() { tl_active = prev_; }

Graph* Graph::active() noexcept { return tl_active; }

bool Graph::recording() noexcept { return tl_active != nullptr && tl_pause_depth == 0; }

void Graph::record(std::shared_ptr<detail::TensorData> out, std::function<void()> propagate) {
    out->requires_grad = true;
    out->is_leaf = false;
    nodes_.push_back(Node{std::move(out), std::move(propagate)});
}

void Graph::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw UsageError("backward() requires a scalar loss");
    if (!loss.requires_grad())
        throw UsageError("backward() loss does not depend on any requires_grad tensor");

    // Fresh pass: intermediate grads are scratch, only leaf grads persist
    // so that repeated backward calls accumulate additively.
    for (Node& n : nodes_)
        n.out->grad.clear();

    const double one = 1.0;
    detail::accumulate_grad(loss.data_ptr(), std::span<const double>(&one, 1));

    visited_ = 0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        ++visited_;
        if (it->out->grad.empty()) continue; // not on the loss path
        it->propagate();
    }
}

GradPause::GradPause() { ++tl_pause_depth; }
GradPause::~GradPause() { --tl_pause_depth; }

namespace detail {

void accumulate_grad(const std::shared_ptr<TensorData>& target, std::span<const double> contrib) {
    if (!target->requires_grad) return;
    if (target->grad.empty()) target->grad.assign(target->value.size(), 0.0);
    for (std::size_t i = 0; i < contrib.size(); ++i) target->grad[i] += contrib[i];
}

void accumulate_grad_scaled(const std::shared_ptr<TensorData>& target,
                            std::span<const double> contrib, double scale) {
    if (!target->requires_grad) return;
    if (target->grad.empty()) target->grad.assign(target->value.size(), 0.0);
    for (std::size_t i = 0; i < contrib.size(); ++i) target->grad[i] += scale * contrib[i];
}

} // namespace detail

} // namespace codinet
