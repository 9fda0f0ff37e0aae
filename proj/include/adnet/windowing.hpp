#pragma once

#include <adnet/error.hpp>
#include <adnet/tensor.hpp>

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace adnet {

/// Per-video clip features: one column per clip (input_dim x num_clips).
struct ClipFeatureSequence {
    std::string video_id;
    Tensor2 features;

    [[nodiscard]] std::size_t num_clips() const noexcept { return features.length(); }
    [[nodiscard]] std::size_t dim() const noexcept { return features.channels(); }
};

/// Fixed-width slice of a sequence. Padding only ever occupies the tail.
struct Window {
    Tensor2 features;           // input_dim x W
    std::vector<double> mask;   // 1 for real clips, 0 for padding
    std::string video_id;
    std::size_t start_clip = 0;

    [[nodiscard]] std::size_t width() const noexcept { return mask.size(); }
    [[nodiscard]] std::size_t real_clips() const noexcept {
        return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1.0));
    }
};

struct WindowSpan {
    std::size_t start = 0;
    std::size_t end = 0; // exclusive; may exceed the sequence length

    friend bool operator==(const WindowSpan&, const WindowSpan&) = default;
};

using WindowPlan = std::vector<WindowSpan>;

/// Half-stride windows: window i (0-based) spans [i*W/2, i*W/2 + W). Windows
/// are emitted until one reaches the end of the sequence.
inline WindowPlan plan_windows(std::size_t num_clips, std::size_t width) {
    if (num_clips == 0) throw InputError("plan_windows: sequence has no clips");
    if (width < 2 || width % 2 != 0) {
        throw ConfigError("plan_windows: window width must be even and >= 2, got " + std::to_string(width));
    }
    const std::size_t stride = width / 2;
    WindowPlan plan;
    for (std::size_t start = 0;; start += stride) {
        plan.push_back({start, start + width});
        if (start + width >= num_clips) break;
    }
    return plan;
}

/// Closed-form window count of plan_windows.
[[nodiscard]] inline std::size_t window_count(std::size_t num_clips, std::size_t width) {
    if (num_clips <= width) return 1;
    const std::size_t stride = width / 2;
    return (num_clips - width + stride - 1) / stride + 1;
}

/// Cuts the planned windows out of `seq`, zero-filling columns past the end.
inline std::vector<Window> materialize(const ClipFeatureSequence& seq, const WindowPlan& plan) {
    const std::size_t total = seq.num_clips();
    std::vector<Window> windows;
    windows.reserve(plan.size());
    for (const WindowSpan& span : plan) {
        if (span.start >= total) {
            throw InputError("materialize: window starting at clip " + std::to_string(span.start) +
                             " lies beyond the " + std::to_string(total) + "-clip sequence");
        }
        const std::size_t width = span.end - span.start;
        Window w;
        w.features = Tensor2(seq.dim(), width);
        w.mask.assign(width, 0.0);
        w.video_id = seq.video_id;
        w.start_clip = span.start;
        const std::size_t real = std::min(span.end, total) - span.start;
        for (std::size_t c = 0; c < seq.dim(); ++c) {
            auto src = seq.features.row(c);
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(span.start), real, w.features.row(c).begin());
        }
        std::fill_n(w.mask.begin(), real, 1.0);
        windows.push_back(std::move(w));
    }
    return windows;
}

inline std::vector<Window> split_into_windows(const ClipFeatureSequence& seq, std::size_t width) {
    return materialize(seq, plan_windows(seq.num_clips(), width));
}

/// Scores produced by the network for one window, with the window's placement.
struct WindowScores {
    std::size_t start_clip = 0;
    std::vector<double> mask;
    std::vector<double> scores;
};

/// Averages overlapping window scores into one score per clip. Masked
/// positions never contribute; every clip in [0, num_clips) must be covered.
inline std::vector<double> merge_scores(const std::vector<WindowScores>& windows, std::size_t num_clips) {
    std::vector<double> sum(num_clips, 0.0);
    std::vector<std::size_t> count(num_clips, 0);
    for (const WindowScores& w : windows) {
        if (w.mask.size() != w.scores.size()) {
            throw ConfigError("merge_scores: mask length " + std::to_string(w.mask.size()) +
                              " vs score length " + std::to_string(w.scores.size()));
        }
        for (std::size_t j = 0; j < w.scores.size(); ++j) {
            if (w.mask[j] == 0.0) continue;
            const std::size_t clip = w.start_clip + j;
            if (clip >= num_clips) {
                throw InternalError("merge_scores: unmasked position maps to clip " + std::to_string(clip) +
                                    " beyond sequence length " + std::to_string(num_clips));
            }
            sum[clip] += w.scores[j];
            count[clip] += 1;
        }
    }
    for (std::size_t t = 0; t < num_clips; ++t) {
        if (count[t] == 0) throw InternalError("merge_scores: clip " + std::to_string(t) + " is not covered by any window");
        sum[t] /= static_cast<double>(count[t]);
    }
    return sum;
}

} // namespace adnet
