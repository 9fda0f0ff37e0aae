#pragma once

#include <adnet/error.hpp>
#include <adnet/tape.hpp>
#include <adnet/tensor.hpp>
#include <adnet/windowing.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace adnet {

/// Largest block count whose padding floor(K/2) * 2^L still fits inside the
/// window: the smallest L with floor(K/2) * 2^L >= W, i.e. ceil(log2(W / floor(K/2))).
[[nodiscard]] inline std::size_t max_layers(std::size_t window_width, std::size_t kernel_size) {
    if (window_width < 2) throw ConfigError("max_layers: window width must be >= 2, got " + std::to_string(window_width));
    if (kernel_size < 3 || kernel_size % 2 == 0) {
        throw ConfigError("max_layers: kernel size must be odd and >= 3, got " + std::to_string(kernel_size));
    }
    const std::size_t half = kernel_size / 2;
    std::size_t layers = 0;
    while ((half << layers) < window_width) ++layers;
    return layers;
}

/// Receptive field 2^(l+1) - 1 of a kernel-2 dilated stack with l+1 layers.
/// Used for configuration diagnostics only; see symmetric_receptive_radius for
/// the bound the network actually obeys.
[[nodiscard]] constexpr std::uint64_t nominal_receptive_field(std::size_t layer) noexcept {
    return (std::uint64_t{1} << (layer + 1)) - 1;
}

/// How far (in clips) one stage of `layers` symmetric dilated blocks can move
/// information: sum over l of floor(K/2) * 2^l.
[[nodiscard]] constexpr std::size_t symmetric_receptive_radius(std::size_t layers, std::size_t kernel_size) noexcept {
    return ((std::size_t{1} << layers) - 1) * (kernel_size / 2);
}

struct ADNetConfig {
    std::size_t window_width = 64;
    std::size_t num_stages = 5;
    std::size_t num_layers = 6;
    std::size_t kernel_size = 3;
    std::size_t hidden_channels = 64;
    std::size_t input_dim = 0;
    double threshold = 0.5;

    void validate() const {
        if (num_stages < 1) throw ConfigError("num_stages must be >= 1");
        if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
        if (hidden_channels < 1) throw ConfigError("hidden_channels must be >= 1");
        if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
        if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
        if (window_width % 2 != 0) throw ConfigError("window_width must be even, got " + std::to_string(window_width));
        const std::size_t bound = max_layers(window_width, kernel_size);
        if (num_layers > bound) {
            throw ConfigError("num_layers " + std::to_string(num_layers) + " exceeds max_layers(" +
                              std::to_string(window_width) + ", " + std::to_string(kernel_size) +
                              ") = " + std::to_string(bound));
        }
    }

    friend bool operator==(const ADNetConfig&, const ADNetConfig&) = default;
};

struct BlockParams {
    ParamTensor dilated_weight;   // D_H x (D_H*K)
    ParamTensor dilated_bias;     // D_H x 1
    ParamTensor pointwise_weight; // D_H x D_H
    ParamTensor pointwise_bias;   // D_H x 1
};

struct StageParams {
    ParamTensor in_weight; // D_H x D_in (D_in = input_dim for the first stage, 1 afterwards)
    ParamTensor in_bias;
    std::vector<BlockParams> blocks;
    ParamTensor out_weight; // 1 x D_H
    ParamTensor out_bias;   // 1 x 1
};

struct ModelParams {
    ADNetConfig config;
    std::vector<StageParams> stages;

    /// Every tensor with its stable name, in a fixed order that depends only on
    /// the configuration.
    template <class Self>
    static auto named(Self& self) {
        using P = std::conditional_t<std::is_const_v<Self>, const ParamTensor, ParamTensor>;
        std::vector<std::pair<std::string, P*>> out;
        for (std::size_t s = 0; s < self.stages.size(); ++s) {
            auto& st = self.stages[s];
            const std::string prefix = "stage" + std::to_string(s) + ".";
            out.emplace_back(prefix + "in.weight", &st.in_weight);
            out.emplace_back(prefix + "in.bias", &st.in_bias);
            for (std::size_t l = 0; l < st.blocks.size(); ++l) {
                auto& b = st.blocks[l];
                const std::string bp = prefix + "block" + std::to_string(l) + ".";
                out.emplace_back(bp + "dilated.weight", &b.dilated_weight);
                out.emplace_back(bp + "dilated.bias", &b.dilated_bias);
                out.emplace_back(bp + "pointwise.weight", &b.pointwise_weight);
                out.emplace_back(bp + "pointwise.bias", &b.pointwise_bias);
            }
            out.emplace_back(prefix + "out.weight", &st.out_weight);
            out.emplace_back(prefix + "out.bias", &st.out_bias);
        }
        return out;
    }

    auto named_params() { return named(*this); }
    auto named_params() const { return named(*this); }

    std::vector<ParamTensor*> params() {
        std::vector<ParamTensor*> out;
        for (auto& [name, p] : named_params()) out.push_back(p);
        return out;
    }

    [[nodiscard]] std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& [name, p] : named_params()) n += p->value.size();
        return n;
    }

    void zero_grad() {
        for (ParamTensor* p : params()) p->zero_grad();
    }

    friend bool operator==(const ModelParams& a, const ModelParams& b) {
        if (!(a.config == b.config)) return false;
        auto na = a.named_params();
        auto nb = b.named_params();
        if (na.size() != nb.size()) return false;
        for (std::size_t k = 0; k < na.size(); ++k) {
            if (na[k].first != nb[k].first || !(na[k].second->value == nb[k].second->value)) return false;
        }
        return true;
    }
};

/// Dilation of block `layer` within a stage.
[[nodiscard]] constexpr std::size_t block_dilation(std::size_t layer) noexcept { return std::size_t{1} << layer; }

namespace detail {

inline StageParams allocate_stage(const ADNetConfig& cfg, std::size_t in_channels) {
    const std::size_t h = cfg.hidden_channels;
    const std::size_t k = cfg.kernel_size;
    StageParams st;
    st.in_weight = ParamTensor(Tensor2(h, in_channels));
    st.in_bias = ParamTensor(Tensor2(h, 1));
    st.blocks.resize(cfg.num_layers);
    for (BlockParams& b : st.blocks) {
        b.dilated_weight = ParamTensor(Tensor2(h, h * k));
        b.dilated_bias = ParamTensor(Tensor2(h, 1));
        b.pointwise_weight = ParamTensor(Tensor2(h, h));
        b.pointwise_bias = ParamTensor(Tensor2(h, 1));
    }
    st.out_weight = ParamTensor(Tensor2(1, h));
    st.out_bias = ParamTensor(Tensor2(1, 1));
    return st;
}

} // namespace detail

/// Zero-initialized parameters with the tensor layout implied by `cfg`.
inline ModelParams allocate(const ADNetConfig& cfg) {
    cfg.validate();
    ModelParams params;
    params.config = cfg;
    for (std::size_t s = 0; s < cfg.num_stages; ++s) {
        params.stages.push_back(detail::allocate_stage(cfg, s == 0 ? cfg.input_dim : 1));
    }
    return params;
}

/// Deterministic initialization: every weight and bias of a layer is drawn
/// uniformly from [-a, a] with a = sqrt(1 / fan_in).
inline ModelParams build(const ADNetConfig& cfg, std::uint64_t seed) {
    ModelParams params = allocate(cfg);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](ParamTensor& p, std::size_t fan_in) {
        const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-a, a);
        for (double& v : p.value.values()) v = dist(rng);
    };
    const std::size_t h = cfg.hidden_channels;
    for (std::size_t s = 0; s < params.stages.size(); ++s) {
        StageParams& st = params.stages[s];
        const std::size_t in_ch = st.in_weight.value.length();
        fill(st.in_weight, in_ch);
        fill(st.in_bias, in_ch);
        for (BlockParams& b : st.blocks) {
            fill(b.dilated_weight, h * cfg.kernel_size);
            fill(b.dilated_bias, h * cfg.kernel_size);
            fill(b.pointwise_weight, h);
            fill(b.pointwise_bias, h);
        }
        fill(st.out_weight, h);
        fill(st.out_bias, h);
    }
    return params;
}

/// Records the full multi-stage pass for one window and returns one 1 x W
/// score variable per stage.
///
/// Each stage projects its input to D_H channels, then applies L residual
/// blocks V <- (V + pointwise(ReLU(dilated(V)))) * mask with dilation 2^l,
/// and ends in a sigmoid head whose output is masked. Stage s >= 1 consumes
/// the previous stage's scores. Masking after every step keeps padded
/// columns at exactly zero, so padding can never reach a real clip.
///
/// Pass `const ModelParams` for inference (no parameter gradients) or a
/// mutable one for training.
template <class Params>
    requires std::same_as<std::remove_const_t<Params>, ModelParams>
std::vector<Var> forward(Params& params, const Tensor2& features, const std::vector<double>& mask, Tape& tape) {
    const ADNetConfig& cfg = params.config;
    if (features.channels() != cfg.input_dim) {
        throw ConfigError("forward: features have " + std::to_string(features.channels()) +
                          " channels, model expects " + std::to_string(cfg.input_dim));
    }
    if (mask.size() != features.length()) {
        throw ConfigError("forward: mask length " + std::to_string(mask.size()) + " vs window length " +
                          std::to_string(features.length()));
    }
    std::vector<Var> outputs;
    outputs.reserve(params.stages.size());
    Var stage_input = tape.input(features);
    for (auto& st : params.stages) {
        Var v = tape.mask(tape.pointwise(stage_input, st.in_weight, st.in_bias), mask);
        for (std::size_t l = 0; l < st.blocks.size(); ++l) {
            auto& b = st.blocks[l];
            Var h = tape.conv1d(v, b.dilated_weight, b.dilated_bias, cfg.kernel_size, block_dilation(l));
            h = tape.pointwise(tape.relu(h), b.pointwise_weight, b.pointwise_bias);
            v = tape.mask(tape.add(v, h), mask);
        }
        Var scores = tape.mask(tape.sigmoid(tape.pointwise(v, st.out_weight, st.out_bias)), mask);
        outputs.push_back(scores);
        stage_input = scores;
    }
    return outputs;
}

template <class Params>
    requires std::same_as<std::remove_const_t<Params>, ModelParams>
std::vector<Var> forward(Params& params, const Window& window, Tape& tape) {
    return forward(params, window.features, window.mask, tape);
}

/// Per-stage scores of one window, computed on a private tape. Safe to call
/// concurrently on shared parameters.
inline std::vector<std::vector<double>> stage_scores(const ModelParams& params, const Window& window) {
    Tape tape;
    const std::vector<Var> outs = forward(params, window, tape);
    std::vector<std::vector<double>> result;
    result.reserve(outs.size());
    for (Var v : outs) {
        const Tensor2& t = tape.value(v);
        if (!all_finite(t)) throw NumericError("forward: non-finite score in window of " + window.video_id);
        result.emplace_back(t.values().begin(), t.values().end());
    }
    return result;
}

/// Final-stage scores of one window; the earlier stages only feed the loss.
inline std::vector<double> window_scores(const ModelParams& params, const Window& window) {
    return stage_scores(params, window).back();
}

/// Binary labels: 1 where score >= threshold.
inline std::vector<int> predict_labels(const std::vector<double>& scores, double threshold) {
    std::vector<int> labels(scores.size());
    for (std::size_t t = 0; t < scores.size(); ++t) labels[t] = scores[t] >= threshold ? 1 : 0;
    return labels;
}

/// Scores every clip of a sequence: split into half-overlapping windows, run
/// the network on each, and average the overlaps.
inline std::vector<double> score_sequence(const ModelParams& params, const ClipFeatureSequence& seq) {
    std::vector<WindowScores> per_window;
    for (Window& w : split_into_windows(seq, params.config.window_width)) {
        per_window.push_back({w.start_clip, w.mask, window_scores(params, w)});
    }
    return merge_scores(per_window, seq.num_clips());
}

} // namespace adnet
