#pragma once

#include <adnet/adam.hpp>
#include <adnet/error.hpp>
#include <adnet/model.hpp>
#include <adnet/tape.hpp>
#include <adnet/windowing.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace adnet {

/// Per-clip binary targets (0 normal, 1 abnormal).
using LabelTimeline = std::vector<int>;

struct TrainConfig {
    double learning_rate = 5e-4;
    double lambda = 0.5;
    double alpha = 0.5;
    std::size_t epochs = 50;
    std::uint64_t seed = 0;
    bool use_ad_loss = true;
    double clip_label_fraction = 0.5;

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
        if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(clip_label_fraction > 0.0 && clip_label_fraction <= 1.0)) {
            throw ConfigError("clip_label_fraction must lie in (0, 1]");
        }
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Clip i covers frames [n*i, n*(i+1)) (the last clip may be shorter) and is
/// abnormal when at least `fraction` of its frames are.
inline LabelTimeline clip_labels_from_frames(const std::vector<int>& frame_labels, std::size_t frames_per_clip,
                                             double fraction = 0.5) {
    if (frame_labels.empty()) throw InputError("clip_labels_from_frames: no frames");
    if (frames_per_clip < 1) throw ConfigError("clip_labels_from_frames: frames_per_clip must be >= 1");
    const std::size_t n = frames_per_clip;
    const std::size_t clips = (frame_labels.size() + n - 1) / n;
    LabelTimeline out(clips);
    for (std::size_t i = 0; i < clips; ++i) {
        const std::size_t begin = i * n;
        const std::size_t end = std::min(begin + n, frame_labels.size());
        std::size_t abnormal = 0;
        for (std::size_t f = begin; f < end; ++f) abnormal += frame_labels[f] != 0 ? 1 : 0;
        out[i] = static_cast<double>(abnormal) >= fraction * static_cast<double>(end - begin) ? 1 : 0;
    }
    return out;
}

namespace detail {

inline void check_loss_inputs(const char* op, std::size_t scores, const LabelTimeline& targets,
                              const std::vector<double>& mask) {
    if (scores != targets.size() || scores != mask.size()) {
        throw ConfigError(std::string(op) + ": scores/targets/mask lengths " + std::to_string(scores) + "/" +
                          std::to_string(targets.size()) + "/" + std::to_string(mask.size()) + " differ");
    }
    if (std::none_of(mask.begin(), mask.end(), [](double m) { return m != 0.0; })) {
        throw InputError(std::string(op) + ": every position is masked");
    }
}

} // namespace detail

/// Mean of (y - a)^2 over unmasked positions.
inline double mse_loss(std::span<const double> scores, const LabelTimeline& targets, const std::vector<double>& mask) {
    detail::check_loss_inputs("mse_loss", scores.size(), targets, mask);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (mask[t] == 0.0) continue;
        const double d = scores[t] - targets[t];
        sum += d * d;
        ++n;
    }
    return sum / static_cast<double>(n);
}

/// Hard-pair breakdown of the AD loss for one window.
struct AdLossTerms {
    double value = 0.0;
    double abnormal_margin = 0.0; // M_A
    double normal_margin = 0.0;   // M_N
    std::vector<std::size_t> abnormal;
    std::vector<std::size_t> hard_normal; // hard_normal[k] pairs with abnormal[k]
    std::vector<std::size_t> normal;
    std::vector<std::size_t> hard_abnormal; // hard_abnormal[k] pairs with normal[k]
    bool both_classes = false;
};

/// Hard pairs are the opposite-class clips with the closest score. Among
/// equidistant candidates the harder one wins (the higher-scoring normal, the
/// lower-scoring abnormal), which keeps the loss independent of clip order.
///
///   M_A  = mean_i (y_i - y_HN(i) - alpha)  over abnormal clips i
///   M_N  = mean_j (y_HA(j) - y_j - alpha)  over normal clips j
///   loss = max(-M_A - M_N, 0)
inline AdLossTerms ad_loss_terms(std::span<const double> scores, const LabelTimeline& targets,
                                 const std::vector<double>& mask, double alpha) {
    detail::check_loss_inputs("ad_loss", scores.size(), targets, mask);
    AdLossTerms r;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (mask[t] == 0.0) continue;
        (targets[t] != 0 ? r.abnormal : r.normal).push_back(t);
    }
    if (r.abnormal.empty() || r.normal.empty()) return r;
    r.both_classes = true;

    auto closest = [&scores](std::size_t anchor, const std::vector<std::size_t>& pool, bool prefer_high) {
        std::size_t best = pool.front();
        double best_dist = std::abs(scores[anchor] - scores[best]);
        for (std::size_t idx : pool) {
            const double d = std::abs(scores[anchor] - scores[idx]);
            const bool harder = prefer_high ? scores[idx] > scores[best] : scores[idx] < scores[best];
            if (d < best_dist || (d == best_dist && harder)) {
                best = idx;
                best_dist = d;
            }
        }
        return best;
    };

    double sum_a = 0.0;
    for (std::size_t i : r.abnormal) {
        const std::size_t hn = closest(i, r.normal, true);
        r.hard_normal.push_back(hn);
        sum_a += scores[i] - scores[hn] - alpha;
    }
    double sum_n = 0.0;
    for (std::size_t j : r.normal) {
        const std::size_t ha = closest(j, r.abnormal, false);
        r.hard_abnormal.push_back(ha);
        sum_n += scores[ha] - scores[j] - alpha;
    }
    r.abnormal_margin = sum_a / static_cast<double>(r.abnormal.size());
    r.normal_margin = sum_n / static_cast<double>(r.normal.size());
    r.value = std::max(-r.abnormal_margin - r.normal_margin, 0.0);
    return r;
}

inline double ad_loss(std::span<const double> scores, const LabelTimeline& targets, const std::vector<double>& mask,
                      double alpha) {
    return ad_loss_terms(scores, targets, mask, alpha).value;
}

/// Tape op for mse_loss on a 1 x W score variable.
inline Var mse_loss(Tape& tape, Var scores, const LabelTimeline& targets, const std::vector<double>& mask) {
    const double value = mse_loss(tape.value(scores).values(), targets, mask);
    return tape.record(Tensor2(1, 1, value), [scores, targets, mask](Tape& t, const Tensor2& g) {
        auto y = t.value(scores).values();
        const double n = static_cast<double>(std::count(mask.begin(), mask.end(), 1.0));
        auto dst = t.grad_buffer(scores).values();
        for (std::size_t k = 0; k < y.size(); ++k)
            if (mask[k] != 0.0) dst[k] += g(0, 0) * 2.0 * (y[k] - targets[k]) / n;
    });
}

/// Tape op for ad_loss. Hard pairs are fixed at record time; the gradient is
/// that of the hinge with those pairs.
inline Var ad_loss(Tape& tape, Var scores, const LabelTimeline& targets, const std::vector<double>& mask,
                   double alpha) {
    AdLossTerms terms = ad_loss_terms(tape.value(scores).values(), targets, mask, alpha);
    const double value = terms.value;
    return tape.record(Tensor2(1, 1, value), [scores, terms = std::move(terms)](Tape& t, const Tensor2& g) {
        if (terms.value <= 0.0) return;
        auto dst = t.grad_buffer(scores).values();
        // d(-M_A)/dy and d(-M_N)/dy
        const double wa = g(0, 0) / static_cast<double>(terms.abnormal.size());
        for (std::size_t k = 0; k < terms.abnormal.size(); ++k) {
            dst[terms.abnormal[k]] -= wa;
            dst[terms.hard_normal[k]] += wa;
        }
        const double wn = g(0, 0) / static_cast<double>(terms.normal.size());
        for (std::size_t k = 0; k < terms.normal.size(); ++k) {
            dst[terms.hard_abnormal[k]] -= wn;
            dst[terms.normal[k]] += wn;
        }
    });
}

struct LossBreakdown {
    double mse = 0.0;   // summed over stages
    double ad = 0.0;    // summed over stages, before lambda
    double total = 0.0; // sum_s (mse_s + lambda * ad_s)
};

/// Records sum_s (MSE_s + lambda * AD_s) over all stage outputs.
inline Var total_loss(Tape& tape, const std::vector<Var>& stages, const LabelTimeline& targets,
                      const std::vector<double>& mask, const TrainConfig& cfg, LossBreakdown* breakdown = nullptr) {
    if (stages.empty()) throw ConfigError("total_loss: no stage outputs");
    LossBreakdown b;
    std::optional<Var> total;
    for (Var s : stages) {
        Var stage_loss = mse_loss(tape, s, targets, mask);
        b.mse += tape.value(stage_loss)(0, 0);
        if (cfg.use_ad_loss) {
            Var ad = ad_loss(tape, s, targets, mask, cfg.alpha);
            b.ad += tape.value(ad)(0, 0);
            stage_loss = tape.add(stage_loss, tape.scale(ad, cfg.lambda));
        }
        total = total ? tape.add(*total, stage_loss) : stage_loss;
    }
    b.total = tape.value(*total)(0, 0);
    if (!std::isfinite(b.total)) throw NumericError("total_loss: loss is not finite");
    if (breakdown) *breakdown = b;
    return *total;
}

/// Value-only form of total_loss over precomputed stage scores.
inline double total_loss(const std::vector<std::vector<double>>& stage_scores, const LabelTimeline& targets,
                         const std::vector<double>& mask, const TrainConfig& cfg) {
    if (stage_scores.empty()) throw ConfigError("total_loss: no stage outputs");
    double total = 0.0;
    for (const auto& s : stage_scores) {
        double stage = mse_loss(s, targets, mask);
        if (cfg.use_ad_loss) stage += cfg.lambda * ad_loss(s, targets, mask, cfg.alpha);
        total += stage;
    }
    return total;
}

/// A feature sequence with its per-clip targets.
struct LabeledSequence {
    ClipFeatureSequence sequence;
    LabelTimeline labels;
};

struct EpochLog {
    std::size_t epoch = 0; // 1-based, continues across resumes
    double mean_mse = 0.0;
    double mean_ad = 0.0;
    double mean_total = 0.0;

    friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

/// Everything needed to continue training where it stopped.
struct TrainState {
    ModelParams params;
    AdamState adam;
    std::size_t epochs_completed = 0;
};

struct TrainResult {
    TrainState state;
    std::vector<EpochLog> log;
};

namespace detail {

struct LabeledWindow {
    Window window;
    LabelTimeline targets; // padded positions hold 0 and are masked out
};

inline std::vector<LabeledWindow> training_windows(const std::vector<LabeledSequence>& dataset, std::size_t width) {
    std::vector<LabeledWindow> out;
    for (const LabeledSequence& item : dataset) {
        for (Window& w : split_into_windows(item.sequence, width)) {
            LabelTimeline targets(w.width(), 0);
            for (std::size_t j = 0; j < w.width(); ++j)
                if (w.mask[j] != 0.0) targets[j] = item.labels[w.start_clip + j];
            out.push_back({std::move(w), std::move(targets)});
        }
    }
    return out;
}

/// Per-epoch shuffling RNG; derived from (seed, epoch) so a resumed run visits
/// windows in the same order as an uninterrupted one.
inline std::mt19937_64 epoch_rng(std::uint64_t seed, std::size_t epoch) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), 0x41444e65u};
    return std::mt19937_64(seq);
}

} // namespace detail

using EpochCallback = std::function<void(const EpochLog&)>;

/// Window-batched training: every epoch visits all half-stride windows of all
/// videos in a seeded shuffled order and takes one Adam step per window.
/// Passing `resume` continues from a previous state for another cfg.epochs epochs.
inline TrainResult train(const std::vector<LabeledSequence>& dataset, ADNetConfig model_cfg,
                         const TrainConfig& train_cfg, std::optional<TrainState> resume = std::nullopt,
                         const EpochCallback& on_epoch = {}) {
    if (dataset.empty()) throw InputError("train: dataset is empty");
    train_cfg.validate();
    const std::size_t dim = dataset.front().sequence.dim();
    if (model_cfg.input_dim == 0) model_cfg.input_dim = dim;
    for (const LabeledSequence& item : dataset) {
        if (item.sequence.dim() != model_cfg.input_dim) {
            throw InputError("train: video " + item.sequence.video_id + " has feature dim " +
                             std::to_string(item.sequence.dim()) + ", model expects " +
                             std::to_string(model_cfg.input_dim));
        }
        if (item.labels.size() != item.sequence.num_clips()) {
            throw InputError("train: video " + item.sequence.video_id + " has " +
                             std::to_string(item.sequence.num_clips()) + " clips but " +
                             std::to_string(item.labels.size()) + " labels");
        }
    }
    model_cfg.validate();

    TrainResult result;
    if (resume) {
        if (!(resume->params.config == model_cfg)) {
            throw ConfigError("train: resume state was built for a different model configuration");
        }
        result.state = std::move(*resume);
        result.state.adam.options.lr = train_cfg.learning_rate;
    } else {
        result.state.params = build(model_cfg, train_cfg.seed);
        const std::vector<ParamTensor*> ps = result.state.params.params();
        result.state.adam = AdamState(AdamOptions{.lr = train_cfg.learning_rate}, ps);
    }
    ModelParams& params = result.state.params;
    const std::vector<ParamTensor*> ps = params.params();
    params.zero_grad();

    const std::vector<detail::LabeledWindow> windows = detail::training_windows(dataset, model_cfg.window_width);
    std::vector<std::size_t> order(windows.size());

    for (std::size_t e = 0; e < train_cfg.epochs; ++e) {
        const std::size_t epoch = result.state.epochs_completed + 1;
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto rng = detail::epoch_rng(train_cfg.seed, epoch);
        std::shuffle(order.begin(), order.end(), rng);

        LossBreakdown sum;
        for (std::size_t idx : order) {
            const detail::LabeledWindow& lw = windows[idx];
            Tape tape;
            const std::vector<Var> stages = forward(params, lw.window, tape);
            LossBreakdown b;
            const Var loss = total_loss(tape, stages, lw.targets, lw.window.mask, train_cfg, &b);
            tape.backward(loss);
            adam_step(ps, result.state.adam);
            params.zero_grad();
            sum.mse += b.mse;
            sum.ad += b.ad;
            sum.total += b.total;
        }
        for (const ParamTensor* p : ps) {
            if (!all_finite(p->value)) throw NumericError("train: parameters diverged in epoch " + std::to_string(epoch));
        }
        const double n = static_cast<double>(windows.size());
        EpochLog entry{epoch, sum.mse / n, sum.ad / n, sum.total / n};
        result.state.epochs_completed = epoch;
        result.log.push_back(entry);
        if (on_epoch) on_epoch(entry);
    }
    return result;
}

} // namespace adnet
