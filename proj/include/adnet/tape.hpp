#pragma once

#include <adnet/error.hpp>
#include <adnet/tensor.hpp>

#include <concepts>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

namespace adnet {

/// Handle to a value recorded on a Tape.
struct Var {
    std::size_t index = static_cast<std::size_t>(-1);
};

template <class P>
concept ParamLike = std::same_as<std::remove_const_t<P>, ParamTensor>;

/// Reverse-mode recorder for one forward pass.
///
/// Every operation stores its output and a closure that maps the output
/// gradient onto its inputs. Parameters passed as non-const ParamTensor
/// receive gradients (accumulated, never overwritten); parameters passed as
/// const are treated as constants, which is how inference runs on shared
/// weights. A tape is single-owner and must not be shared between threads.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const Tensor2& grad_out)>;

    /// Leaf value. Its gradient is available through grad() after backward().
    Var input(Tensor2 value) { return push(std::move(value), nullptr); }

    /// Records an arbitrary differentiable op. `backward` receives the output
    /// gradient and must route it to parents via accumulate().
    Var record(Tensor2 value, BackwardFn backward) { return push(std::move(value), std::move(backward)); }

    [[nodiscard]] const Tensor2& value(Var v) const { return node(v).value; }

    /// Gradient of the last backward() target with respect to `v`; zeros if
    /// `v` did not influence it.
    [[nodiscard]] Tensor2 grad(Var v) const {
        const Node& n = node(v);
        if (n.grad.empty()) return Tensor2(n.value.channels(), n.value.length());
        return n.grad;
    }

    void accumulate(Var v, const Tensor2& g) {
        Node& n = node(v);
        if (n.grad.empty()) {
            n.grad = g;
            return;
        }
        auto dst = n.grad.values();
        auto src = g.values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }

    /// Mutable gradient buffer of `v`, allocated on first use.
    Tensor2& grad_buffer(Var v) {
        Node& n = node(v);
        if (n.grad.empty()) n.grad = Tensor2(n.value.channels(), n.value.length());
        return n.grad;
    }

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

    /// Propagates d(loss)/d(loss) = 1 back through the tape. `loss` must be 1x1.
    void backward(Var loss) {
        if (nodes_.empty()) throw UsageError("backward: nothing has been recorded on the tape");
        const Node& target = node(loss);
        if (target.value.channels() != 1 || target.value.length() != 1) {
            throw UsageError("backward: target must be a 1x1 scalar, got " +
                             target.value.shape_string());
        }
        for (Node& n : nodes_) n.grad = Tensor2();
        nodes_[loss.index].grad = Tensor2(1, 1, 1.0);
        for (std::size_t k = loss.index + 1; k-- > 0;) {
            if (nodes_[k].grad.empty() || !nodes_[k].backward) continue;
            // Closures only write to parents, which sit at lower indices.
            nodes_[k].backward(*this, nodes_[k].grad);
        }
    }

    template <ParamLike P>
    Var conv1d(Var x, P& kernel, P& bias, std::size_t kernel_size, std::size_t dilation) {
        Tensor2 out = ops::conv1d_dilated(value(x), kernel.value, bias.value, kernel_size, dilation);
        return record(std::move(out), [x, &kernel, &bias, kernel_size, dilation](Tape& t, const Tensor2& g) {
            ops::conv1d_dilated_backward(t.value(x), kernel.value, kernel_size, dilation, g,
                                         &t.grad_buffer(x), grad_target(kernel), grad_target(bias));
        });
    }

    template <ParamLike P>
    Var pointwise(Var x, P& kernel, P& bias) {
        Tensor2 out = ops::pointwise_conv(value(x), kernel.value, bias.value);
        return record(std::move(out), [x, &kernel, &bias](Tape& t, const Tensor2& g) {
            ops::pointwise_conv_backward(t.value(x), kernel.value, g, &t.grad_buffer(x),
                                         grad_target(kernel), grad_target(bias));
        });
    }

    Var relu(Var x) {
        return record(ops::relu(value(x)), [x](Tape& t, const Tensor2& g) {
            Tensor2& gx = t.grad_buffer(x);
            auto in = t.value(x).values();
            auto gv = g.values();
            auto dst = gx.values();
            for (std::size_t k = 0; k < dst.size(); ++k)
                if (in[k] > 0.0) dst[k] += gv[k];
        });
    }

    Var sigmoid(Var x) {
        Var out{nodes_.size()};
        return record(ops::sigmoid(value(x)), [x, out](Tape& t, const Tensor2& g) {
            Tensor2& gx = t.grad_buffer(x);
            auto y = t.value(out).values();
            auto gv = g.values();
            auto dst = gx.values();
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += gv[k] * y[k] * (1.0 - y[k]);
        });
    }

    Var add(Var a, Var b) {
        return record(ops::add(value(a), value(b)), [a, b](Tape& t, const Tensor2& g) {
            t.accumulate(a, g);
            t.accumulate(b, g);
        });
    }

    /// Broadcasts a binary column mask over channels.
    Var mask(Var x, std::vector<double> mask) {
        Tensor2 out = ops::mask_mul(value(x), mask);
        return record(std::move(out), [x, mask = std::move(mask)](Tape& t, const Tensor2& g) {
            t.accumulate(x, ops::mask_mul(g, mask));
        });
    }

    /// Scalar sum_k weights[k] * x[k]; used to reduce tensors for gradient checks.
    Var weighted_sum(Var x, Tensor2 weights) {
        if (!weights.same_shape(value(x))) {
            throw ConfigError("weighted_sum: weights " + weights.shape_string() + " vs input " +
                              value(x).shape_string());
        }
        double s = 0.0;
        auto xv = value(x).values();
        auto wv = weights.values();
        for (std::size_t k = 0; k < xv.size(); ++k) s += xv[k] * wv[k];
        return record(Tensor2(1, 1, s), [x, weights = std::move(weights)](Tape& t, const Tensor2& g) {
            Tensor2& gx = t.grad_buffer(x);
            auto dst = gx.values();
            auto wv = weights.values();
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g(0, 0) * wv[k];
        });
    }

    Var scale(Var x, double factor) {
        Tensor2 out = value(x);
        for (double& v : out.values()) v *= factor;
        return record(std::move(out), [x, factor](Tape& t, const Tensor2& g) {
            Tensor2 gx = g;
            for (double& v : gx.values()) v *= factor;
            t.accumulate(x, gx);
        });
    }

private:
    struct Node {
        Tensor2 value;
        Tensor2 grad;
        BackwardFn backward;
    };

    template <ParamLike P>
    static Tensor2* grad_target(P& p) {
        if constexpr (std::is_const_v<P>) {
            return nullptr;
        } else {
            return &p.grad;
        }
    }

    Var push(Tensor2 value, BackwardFn fn) {
        nodes_.push_back(Node{std::move(value), Tensor2(), std::move(fn)});
        return Var{nodes_.size() - 1};
    }

    Node& node(Var v) {
        if (v.index >= nodes_.size()) throw UsageError("tape: unknown variable " + std::to_string(v.index));
        return nodes_[v.index];
    }
    const Node& node(Var v) const {
        if (v.index >= nodes_.size()) throw UsageError("tape: unknown variable " + std::to_string(v.index));
        return nodes_[v.index];
    }

    std::vector<Node> nodes_;
};

} // namespace adnet
