#pragma once

#include <adnet/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace adnet {

/// Dense channels x length grid of doubles, row-major (one row per channel).
class Tensor2 {
public:
    Tensor2() = default;

    Tensor2(std::size_t channels, std::size_t length, double fill = 0.0)
        : channels_(channels), length_(length), data_(channels * length, fill) {}

    Tensor2(std::size_t channels, std::size_t length, std::vector<double> data)
        : channels_(channels), length_(length), data_(std::move(data)) {
        if (data_.size() != channels_ * length_) {
            throw ConfigError("Tensor2: data size " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(channels_) + "x" +
                              std::to_string(length_));
        }
    }

    /// Builds a tensor from nested rows; all rows must share one length.
    static Tensor2 from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        Tensor2 out(rows.size(), rows.front().size());
        for (std::size_t c = 0; c < rows.size(); ++c) {
            if (rows[c].size() != out.length_) throw ConfigError("Tensor2: ragged rows");
            std::copy(rows[c].begin(), rows[c].end(), out.row(c).begin());
        }
        return out;
    }

    [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t length() const noexcept { return length_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t c, std::size_t t) noexcept { return data_[c * length_ + t]; }
    double operator()(std::size_t c, std::size_t t) const noexcept { return data_[c * length_ + t]; }

    std::span<double> row(std::size_t c) noexcept { return {data_.data() + c * length_, length_}; }
    std::span<const double> row(std::size_t c) const noexcept {
        return {data_.data() + c * length_, length_};
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    [[nodiscard]] bool same_shape(const Tensor2& other) const noexcept {
        return channels_ == other.channels_ && length_ == other.length_;
    }

    [[nodiscard]] std::string shape_string() const {
        return std::to_string(channels_) + "x" + std::to_string(length_);
    }

    friend bool operator==(const Tensor2&, const Tensor2&) = default;

private:
    std::size_t channels_ = 0;
    std::size_t length_ = 0;
    std::vector<double> data_;
};

[[nodiscard]] inline bool all_finite(const Tensor2& t) noexcept {
    return std::all_of(t.values().begin(), t.values().end(),
                       [](double v) { return std::isfinite(v); });
}

/// A learnable tensor with its accumulated gradient.
struct ParamTensor {
    Tensor2 value;
    Tensor2 grad;

    ParamTensor() = default;
    explicit ParamTensor(Tensor2 v) : value(std::move(v)), grad(value.channels(), value.length()) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Forward and backward kernels for the fixed operation set. The tape in
/// tape.hpp composes them; they are also usable directly for inference.
namespace ops {

namespace detail {
inline void require(bool ok, const char* op, const std::string& what) {
    if (!ok) throw ConfigError(std::string(op) + ": " + what);
}
} // namespace detail

/// Same-length dilated 1-D convolution with symmetric zero padding of
/// floor(K/2)*dilation. `kernel` is Cout x (Cin*K), tap j of input channel i
/// at column i*K + j. `bias` is Cout x 1.
inline Tensor2 conv1d_dilated(const Tensor2& input, const Tensor2& kernel, const Tensor2& bias,
                              std::size_t kernel_size, std::size_t dilation) {
    const std::size_t cin = input.channels();
    const std::size_t cout = kernel.channels();
    const std::size_t len = input.length();
    detail::require(kernel_size >= 1, "conv1d_dilated", "kernel size must be positive");
    detail::require(dilation >= 1, "conv1d_dilated", "dilation must be positive");
    detail::require(len >= 1, "conv1d_dilated", "input length must be positive");
    detail::require(kernel.length() == cin * kernel_size, "conv1d_dilated",
                    "kernel " + kernel.shape_string() + " does not match " +
                        std::to_string(cin) + " input channels and K=" +
                        std::to_string(kernel_size));
    detail::require(bias.channels() == cout && bias.length() == 1, "conv1d_dilated",
                    "bias " + bias.shape_string() + " does not match " + std::to_string(cout) +
                        " output channels");

    const auto half = static_cast<std::ptrdiff_t>(kernel_size / 2);
    const auto slen = static_cast<std::ptrdiff_t>(len);
    Tensor2 out(cout, len);
    for (std::size_t c = 0; c < cout; ++c) {
        auto o = out.row(c);
        std::fill(o.begin(), o.end(), bias(c, 0));
        for (std::size_t i = 0; i < cin; ++i) {
            const auto in = input.row(i);
            for (std::size_t j = 0; j < kernel_size; ++j) {
                const double w = kernel(c, i * kernel_size + j);
                if (w == 0.0) continue;
                const std::ptrdiff_t off =
                    (static_cast<std::ptrdiff_t>(j) - half) * static_cast<std::ptrdiff_t>(dilation);
                const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -off);
                const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(slen, slen - off);
                for (std::ptrdiff_t t = t0; t < t1; ++t) o[t] += w * in[t + off];
            }
        }
    }
    return out;
}

/// Accumulates gradients of conv1d_dilated into the three gradient buffers.
/// Any of them may be null when that gradient is not needed.
inline void conv1d_dilated_backward(const Tensor2& input, const Tensor2& kernel,
                                    std::size_t kernel_size, std::size_t dilation,
                                    const Tensor2& grad_out, Tensor2* grad_input,
                                    Tensor2* grad_kernel, Tensor2* grad_bias) {
    const std::size_t cin = input.channels();
    const std::size_t cout = kernel.channels();
    const auto half = static_cast<std::ptrdiff_t>(kernel_size / 2);
    const auto slen = static_cast<std::ptrdiff_t>(input.length());
    for (std::size_t c = 0; c < cout; ++c) {
        const auto g = grad_out.row(c);
        if (grad_bias) {
            double s = 0.0;
            for (double v : g) s += v;
            (*grad_bias)(c, 0) += s;
        }
        for (std::size_t i = 0; i < cin; ++i) {
            const auto in = input.row(i);
            for (std::size_t j = 0; j < kernel_size; ++j) {
                const std::ptrdiff_t off =
                    (static_cast<std::ptrdiff_t>(j) - half) * static_cast<std::ptrdiff_t>(dilation);
                const std::ptrdiff_t t0 = std::max<std::ptrdiff_t>(0, -off);
                const std::ptrdiff_t t1 = std::min<std::ptrdiff_t>(slen, slen - off);
                if (grad_kernel) {
                    double s = 0.0;
                    for (std::ptrdiff_t t = t0; t < t1; ++t) s += g[t] * in[t + off];
                    (*grad_kernel)(c, i * kernel_size + j) += s;
                }
                if (grad_input) {
                    const double w = kernel(c, i * kernel_size + j);
                    auto gi = grad_input->row(i);
                    for (std::ptrdiff_t t = t0; t < t1; ++t) gi[t + off] += w * g[t];
                }
            }
        }
    }
}

/// 1x1 convolution: out[c,t] = bias[c] + sum_i kernel[c,i] * input[i,t].
inline Tensor2 pointwise_conv(const Tensor2& input, const Tensor2& kernel, const Tensor2& bias) {
    detail::require(kernel.length() == input.channels(), "pointwise_conv",
                    "kernel " + kernel.shape_string() + " does not match " +
                        std::to_string(input.channels()) + " input channels");
    detail::require(bias.channels() == kernel.channels() && bias.length() == 1, "pointwise_conv",
                    "bias " + bias.shape_string() + " does not match kernel " +
                        kernel.shape_string());
    return conv1d_dilated(input, kernel, bias, 1, 1);
}

inline void pointwise_conv_backward(const Tensor2& input, const Tensor2& kernel,
                                    const Tensor2& grad_out, Tensor2* grad_input,
                                    Tensor2* grad_kernel, Tensor2* grad_bias) {
    conv1d_dilated_backward(input, kernel, 1, 1, grad_out, grad_input, grad_kernel, grad_bias);
}

inline Tensor2 relu(const Tensor2& input) {
    Tensor2 out = input;
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    return out;
}

/// Numerically stable logistic function; never produces NaN for finite input.
inline double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline Tensor2 sigmoid(const Tensor2& input) {
    Tensor2 out = input;
    for (double& v : out.values()) v = sigmoid(v);
    return out;
}

inline Tensor2 add(const Tensor2& a, const Tensor2& b) {
    detail::require(a.same_shape(b), "add",
                    "shape " + a.shape_string() + " vs " + b.shape_string());
    Tensor2 out = a;
    auto o = out.values();
    auto bv = b.values();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] += bv[k];
    return out;
}

inline void check_mask(const Tensor2& input, std::span<const double> mask) {
    detail::require(mask.size() == input.length(), "mask_mul",
                    "mask length " + std::to_string(mask.size()) + " vs input length " +
                        std::to_string(input.length()));
    for (double m : mask) detail::require(m == 0.0 || m == 1.0, "mask_mul", "mask entries must be 0 or 1");
}

/// Zeroes every column whose mask entry is 0. Masked columns become exact +0.0
/// regardless of their input value.
inline Tensor2 mask_mul(const Tensor2& input, std::span<const double> mask) {
    check_mask(input, mask);
    Tensor2 out = input;
    for (std::size_t c = 0; c < out.channels(); ++c) {
        auto r = out.row(c);
        for (std::size_t t = 0; t < r.size(); ++t)
            if (mask[t] == 0.0) r[t] = 0.0;
    }
    return out;
}

} // namespace ops
} // namespace adnet
