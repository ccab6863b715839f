#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "codinet/errors.hpp"

namespace codinet {

using Shape = std::vector<int>;

namespace detail {

struct TensorData {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad; // empty until first accumulation
    bool requires_grad = false;
    bool is_leaf = true; // false once produced by a recorded op
};

} // namespace detail

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense row-major tensor handle with value semantics over a shared
/// payload. Gradients live next to the values and are filled by
/// Graph::backward.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double fill, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const noexcept { return static_cast<bool>(d_); }
    const Shape& shape() const { return d_->shape; }
    std::int64_t size() const { return static_cast<std::int64_t>(d_->value.size()); }
    int dim(int i) const { return d_->shape.at(static_cast<std::size_t>(i)); }

    std::span<const double> value() const { return d_->value; }
    std::span<double> mutable_value() { return d_->value; }

    bool requires_grad() const { return d_->requires_grad; }
    void set_requires_grad(bool rg) { d_->requires_grad = rg; }
    bool is_leaf() const { return d_->is_leaf; }

    bool has_grad() const { return !d_->grad.empty(); }
    /// Gradient as a span; zeros if backward never reached this tensor.
    std::span<const double> grad() const;
    void zero_grad();

    /// Value of a one-element tensor.
    double item() const;

    bool all_finite() const noexcept;

    /// True when both handles share one payload.
    bool same_as(const Tensor& other) const noexcept { return d_ == other.d_; }

    std::shared_ptr<detail::TensorData> data_ptr() const { return d_; }

private:
    explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}
    std::shared_ptr<detail::TensorData> d_;

    friend class Graph;
    friend Tensor make_op_output(Shape, std::vector<double>);
};

Tensor make_op_output(Shape shape, std::vector<double> data);

/// Reverse-mode tape. Constructing a Graph makes it the active tape for
/// the current thread; ops executed while it is active append nodes in
/// execution order. backward() walks the tape once in reverse, which is a
/// reverse topological order because nodes are recorded as they execute.
class Graph {
public:
    Graph();
    ~Graph();
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Accumulates d loss / d t into t.grad for every requires_grad leaf
    /// reachable from loss. Repeated calls without zero_grad add up.
    void backward(const Tensor& loss);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t visited_in_last_backward() const noexcept { return visited_; }

    static Graph* active() noexcept;
    /// True when ops should record nodes (a graph is active and no
    /// GradPause is in effect).
    static bool recording() noexcept;

    void record(std::shared_ptr<detail::TensorData> out, std::function<void()> propagate);

private:
    struct Node {
        std::shared_ptr<detail::TensorData> out;
        std::function<void()> propagate;
    };
    std::vector<Node> nodes_;
    std::size_t visited_ = 0;
    Graph* prev_ = nullptr;

    friend class GradPause;
};

/// RAII guard that suspends recording, so wrapped ops behave as pure
/// evaluation even while a Graph is active. Used for the frozen routers
/// in stage-2 finetuning and for finite-difference re-evaluation.
class GradPause {
public:
    GradPause();
    ~GradPause();
    GradPause(const GradPause&) = delete;
    GradPause& operator=(const GradPause&) = delete;
};

namespace detail {
/// Adds `contrib` into target.grad when target wants gradients.
void accumulate_grad(const std::shared_ptr<TensorData>& target, std::span<const double> contrib);
void accumulate_grad_scaled(const std::shared_ptr<TensorData>& target,
                            std::span<const double> contrib, double scale);
} // namespace detail

} // namespace codinet
