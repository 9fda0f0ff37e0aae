#pragma once

#include <adnet/error.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adnet {

/// Maximal run of frames [start_frame, end_frame) sharing one label.
struct TemporalSegment {
    std::size_t start_frame = 0;
    std::size_t end_frame = 0;
    int label = 0; // 0 normal, 1 abnormal

    [[nodiscard]] std::size_t length() const noexcept { return end_frame - start_frame; }
    friend bool operator==(const TemporalSegment&, const TemporalSegment&) = default;
};

enum class SegmentScope { abnormal, normal, all };

inline constexpr std::array<SegmentScope, 3> kAllScopes{SegmentScope::abnormal, SegmentScope::normal,
                                                        SegmentScope::all};

[[nodiscard]] constexpr std::string_view scope_name(SegmentScope s) noexcept {
    switch (s) {
    case SegmentScope::abnormal: return "abnormal";
    case SegmentScope::normal: return "normal";
    case SegmentScope::all: return "all";
    }
    return "?";
}

[[nodiscard]] constexpr bool in_scope(int label, SegmentScope s) noexcept {
    return s == SegmentScope::all || (s == SegmentScope::abnormal) == (label != 0);
}

/// Copies each clip value to its n frames; frame j takes clip floor(j / n).
template <class T>
std::vector<T> expand_to_frames(const std::vector<T>& clip_values, std::size_t frames_per_clip,
                                std::size_t total_frames) {
    const std::size_t n = frames_per_clip;
    const std::size_t clips = clip_values.size();
    if (n < 1) throw InputError("expand_to_frames: frames_per_clip must be >= 1");
    if (clips == 0 || total_frames > n * clips || total_frames < n * (clips - 1) + 1) {
        throw InputError("expand_to_frames: " + std::to_string(total_frames) + " frames cannot come from " +
                         std::to_string(clips) + " clips of " + std::to_string(n) + " frames");
    }
    std::vector<T> frames(total_frames);
    for (std::size_t j = 0; j < total_frames; ++j) frames[j] = clip_values[j / n];
    return frames;
}

/// Run-length encodes a label sequence. Normal runs are segments too.
inline std::vector<TemporalSegment> segments_from_labels(const std::vector<int>& labels) {
    std::vector<TemporalSegment> out;
    std::size_t start = 0;
    for (std::size_t j = 1; j <= labels.size(); ++j) {
        if (j == labels.size() || labels[j] != labels[start]) {
            out.push_back({start, j, labels[start] != 0 ? 1 : 0});
            start = j;
        }
    }
    return out;
}

/// Throws unless `segs` tile [0, end) without gaps or overlaps.
inline std::size_t check_partition(const std::vector<TemporalSegment>& segs, std::string_view what) {
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const TemporalSegment& s = segs[k];
        if (s.start_frame != cursor || s.end_frame <= s.start_frame) {
            throw InputError(std::string(what) + ": segment " + std::to_string(k) + " [" +
                             std::to_string(s.start_frame) + ", " + std::to_string(s.end_frame) +
                             ") does not continue the partition at frame " + std::to_string(cursor));
        }
        cursor = s.end_frame;
    }
    return cursor;
}

[[nodiscard]] inline std::size_t intersection(const TemporalSegment& a, const TemporalSegment& b) noexcept {
    const std::size_t lo = std::max(a.start_frame, b.start_frame);
    const std::size_t hi = std::min(a.end_frame, b.end_frame);
    return hi > lo ? hi - lo : 0;
}

[[nodiscard]] inline double iou(const TemporalSegment& a, const TemporalSegment& b) noexcept {
    const std::size_t inter = intersection(a, b);
    const std::size_t uni = a.length() + b.length() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// IoU >= k / 100, evaluated on integer frame counts without rounding.
[[nodiscard]] inline bool iou_reaches(const TemporalSegment& a, const TemporalSegment& b, double k) noexcept {
    const std::size_t inter = intersection(a, b);
    const std::size_t uni = a.length() + b.length() - inter;
    return 100.0 * static_cast<double>(inter) >= k * static_cast<double>(uni);
}

struct SegmentCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    SegmentCounts& operator+=(const SegmentCounts& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const SegmentCounts&, const SegmentCounts&) = default;
};

/// Greedy in-order matching: each predicted segment claims its best-IoU
/// same-label ground-truth segment if that overlap reaches k percent and the
/// segment is still unclaimed; otherwise it is a false positive.
inline SegmentCounts match_segments(const std::vector<TemporalSegment>& pred, const std::vector<TemporalSegment>& gt,
                                    double k, SegmentScope scope) {
    const std::size_t pred_end = check_partition(pred, "prediction");
    const std::size_t gt_end = check_partition(gt, "ground truth");
    if (pred_end != gt_end) {
        throw InputError("f1_at_k: prediction covers " + std::to_string(pred_end) + " frames, ground truth " +
                         std::to_string(gt_end));
    }
    SegmentCounts c;
    std::vector<bool> claimed(gt.size(), false);
    for (const TemporalSegment& p : pred) {
        if (!in_scope(p.label, scope)) continue;
        std::optional<std::size_t> best;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (gt[g].label != p.label) continue;
            const double v = iou(p, gt[g]);
            if (v > best_iou) {
                best_iou = v;
                best = g;
            }
        }
        if (best && iou_reaches(p, gt[*best], k) && !claimed[*best]) {
            claimed[*best] = true;
            ++c.tp;
        } else {
            ++c.fp;
        }
    }
    for (std::size_t g = 0; g < gt.size(); ++g)
        if (in_scope(gt[g].label, scope) && !claimed[g]) ++c.fn;
    return c;
}

/// Precision, recall and F1, all in percent.
struct F1Score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// An empty scope on both sides (nothing to find, nothing predicted) scores
/// 100: the prediction agrees with the ground truth.
inline F1Score score_from_counts(const SegmentCounts& c) {
    if (c.tp + c.fp + c.fn == 0) return {100.0, 100.0, 100.0};
    F1Score s;
    s.precision = c.tp + c.fp == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    s.recall = c.tp + c.fn == 0 ? 0.0 : 100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

inline F1Score f1_at_k(const std::vector<TemporalSegment>& pred, const std::vector<TemporalSegment>& gt, double k,
                       SegmentScope scope) {
    return score_from_counts(match_segments(pred, gt, k, scope));
}

/// ROC AUC as the Mann-Whitney statistic P(s_abnormal > s_normal) + 0.5 P(tie),
/// computed from mid-ranks in O(n log n).
inline double frame_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw InputError("frame_auc: " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j); // mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] != 0) {
                positive_rank_sum += mid_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw UndefinedMetricError("frame_auc: both classes must be present (" + std::to_string(positives) +
                                   " abnormal, " + std::to_string(negatives) + " normal frames)");
    }
    const double np = static_cast<double>(positives);
    const double nn = static_cast<double>(negatives);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

struct PredictedVideo {
    std::string video_id;
    std::vector<double> clip_scores;
};

struct GroundTruthVideo {
    std::string video_id;
    std::vector<int> frame_labels;
};

struct ScopeResult {
    double k = 0.0;
    SegmentCounts counts;
    F1Score score;
};

struct EvalReport {
    std::vector<double> ks;
    std::map<SegmentScope, std::vector<ScopeResult>> scopes; // one entry per k, in ks order
    std::optional<double> frame_auc;                         // absent when the corpus has one class
    std::size_t num_videos = 0;
    std::size_t num_frames = 0;

    [[nodiscard]] const ScopeResult& at(SegmentScope scope, double k) const {
        for (const ScopeResult& r : scopes.at(scope))
            if (r.k == k) return r;
        throw InputError("EvalReport: no result for k=" + std::to_string(k));
    }
};

/// Corpus-level evaluation: clip scores are expanded to frames, thresholded,
/// and segmented per video; segment counts are pooled across all videos
/// before precision/recall; AUC runs over the concatenated frames.
inline EvalReport evaluate(const std::vector<PredictedVideo>& preds, const std::vector<GroundTruthVideo>& gts,
                           std::size_t frames_per_clip, const std::vector<double>& ks, double threshold = 0.5) {
    std::map<std::string, const PredictedVideo*> by_id;
    for (const PredictedVideo& p : preds) by_id[p.video_id] = &p;
    if (by_id.size() != preds.size()) throw InputError("evaluate: duplicate video id among predictions");
    for (const GroundTruthVideo& g : gts) {
        if (!by_id.contains(g.video_id)) throw InputError("evaluate: no prediction for video " + g.video_id);
    }
    if (preds.size() != gts.size()) {
        for (const PredictedVideo& p : preds) {
            const bool known = std::any_of(gts.begin(), gts.end(),
                                           [&p](const GroundTruthVideo& g) { return g.video_id == p.video_id; });
            if (!known) throw InputError("evaluate: no ground truth for video " + p.video_id);
        }
    }

    EvalReport report;
    report.ks = ks;
    std::map<SegmentScope, std::vector<SegmentCounts>> pooled;
    for (SegmentScope s : kAllScopes) pooled[s].assign(ks.size(), {});

    std::vector<double> all_scores;
    std::vector<int> all_labels;
    for (const GroundTruthVideo& g : gts) {
        const PredictedVideo& p = *by_id.at(g.video_id);
        std::vector<double> frame_scores = expand_to_frames(p.clip_scores, frames_per_clip, g.frame_labels.size());
        std::vector<int> frame_pred(frame_scores.size());
        for (std::size_t j = 0; j < frame_scores.size(); ++j) frame_pred[j] = frame_scores[j] >= threshold ? 1 : 0;
        const auto pred_segs = segments_from_labels(frame_pred);
        const auto gt_segs = segments_from_labels(g.frame_labels);
        for (SegmentScope s : kAllScopes)
            for (std::size_t i = 0; i < ks.size(); ++i) pooled[s][i] += match_segments(pred_segs, gt_segs, ks[i], s);
        all_scores.insert(all_scores.end(), frame_scores.begin(), frame_scores.end());
        all_labels.insert(all_labels.end(), g.frame_labels.begin(), g.frame_labels.end());
    }
    for (SegmentScope s : kAllScopes) {
        for (std::size_t i = 0; i < ks.size(); ++i) {
            report.scopes[s].push_back({ks[i], pooled[s][i], score_from_counts(pooled[s][i])});
        }
    }
    report.num_videos = gts.size();
    report.num_frames = all_scores.size();
    try {
        report.frame_auc = frame_auc(all_scores, all_labels);
    } catch (const UndefinedMetricError&) {
        report.frame_auc.reset();
    }
    return report;
}

} // namespace adnet
