#include "oracles.hpp"

#include <adnet/evaluation.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace adnet;

namespace {

using Segs = std::vector<TemporalSegment>;

} // namespace

TEST(ExpandToFrames, Examples) {
    EXPECT_EQ(expand_to_frames(std::vector<double>{0.1, 0.9}, 3, 6), (std::vector<double>{0.1, 0.1, 0.1, 0.9, 0.9, 0.9}));
    EXPECT_EQ(expand_to_frames(std::vector<double>{0.1, 0.9}, 3, 5), (std::vector<double>{0.1, 0.1, 0.1, 0.9, 0.9}));
    const std::vector<int> v{1, 0, 1};
    EXPECT_EQ(expand_to_frames(v, 1, 3), v);
}

TEST(ExpandToFrames, RejectsInconsistentLengths) {
    const std::vector<double> v{0.1, 0.9};
    EXPECT_THROW(expand_to_frames(v, 3, 7), InputError);
    EXPECT_THROW(expand_to_frames(v, 3, 3), InputError);
    EXPECT_THROW(expand_to_frames(v, 0, 2), InputError);
    EXPECT_THROW(expand_to_frames(std::vector<double>{}, 3, 0), InputError);
}

TEST(Segments, Examples) {
    EXPECT_EQ(segments_from_labels({0, 0, 1, 1, 0}), (Segs{{0, 2, 0}, {2, 4, 1}, {4, 5, 0}}));
    EXPECT_EQ(segments_from_labels({0, 0, 0}), (Segs{{0, 3, 0}}));
    EXPECT_EQ(segments_from_labels({0, 1, 0, 1}).size(), 4u);
}

TEST(Segments, ClipLevelScalesToFrameLevel) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t T = 1 + rng() % 30, n = 1 + rng() % 5;
        std::vector<int> clips(T);
        for (int& c : clips) c = static_cast<int>(rng() % 2);
        const Segs frame_level = segments_from_labels(expand_to_frames(clips, n, n * T));
        Segs scaled = segments_from_labels(clips);
        for (auto& s : scaled) {
            s.start_frame *= n;
            s.end_frame *= n;
        }
        EXPECT_EQ(frame_level, scaled);
    }
}

TEST(Iou, IntegerArithmetic) {
    const TemporalSegment a{0, 50, 1}, b{25, 75, 1};
    EXPECT_EQ(intersection(a, b), 25u);
    EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
    EXPECT_TRUE(iou_reaches(a, b, 25));
    EXPECT_FALSE(iou_reaches(a, b, 50));
    EXPECT_TRUE(iou_reaches({0, 2, 1}, {1, 3, 1}, 100.0 / 3.0));
}

TEST(F1AtK, IdenticalPredictionScoresHundred) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Segs gt = oracle::random_partition(rng, 40 + rng() % 60, 8);
        for (SegmentScope s : kAllScopes) {
            for (double k : {1.0, 10.0, 25.0, 50.0, 75.0, 100.0}) EXPECT_EQ(f1_at_k(gt, gt, k, s).f1, 100.0);
        }
    }
}

TEST(F1AtK, PartialOverlapExample) {
    const Segs pred{{0, 50, 1}, {50, 100, 0}};
    const Segs gt{{0, 25, 0}, {25, 75, 1}, {75, 100, 0}};
    EXPECT_EQ(match_segments(pred, gt, 10, SegmentScope::abnormal), (SegmentCounts{1, 0, 0}));
    EXPECT_EQ(match_segments(pred, gt, 25, SegmentScope::abnormal), (SegmentCounts{1, 0, 0}));
    EXPECT_EQ(match_segments(pred, gt, 50, SegmentScope::abnormal), (SegmentCounts{0, 1, 1}));
}

TEST(F1AtK, OverSegmentationIsPenalized) {
    // pred splits the abnormal gt (20, 80) into two halves separated by one normal frame
    const Segs gt{{0, 20, 0}, {20, 80, 1}, {80, 100, 0}};
    const Segs pred{{0, 20, 0}, {20, 50, 1}, {50, 51, 0}, {51, 80, 1}, {80, 100, 0}};
    const F1Score f = f1_at_k(pred, gt, 10, SegmentScope::abnormal);
    EXPECT_EQ(match_segments(pred, gt, 10, SegmentScope::abnormal), (SegmentCounts{1, 1, 0}));
    EXPECT_DOUBLE_EQ(f.precision, 50.0);
    EXPECT_DOUBLE_EQ(f.recall, 100.0);
    EXPECT_NEAR(f.f1, 200.0 / 3.0, 1e-12);
}

TEST(F1AtK, EmptyScopeOnBothSides) {
    const Segs all_normal{{0, 10, 0}};
    EXPECT_EQ(f1_at_k(all_normal, all_normal, 50, SegmentScope::abnormal).f1, 100.0);
    const Segs gt{{0, 5, 0}, {5, 10, 1}};
    EXPECT_EQ(f1_at_k(all_normal, gt, 50, SegmentScope::abnormal).f1, 0.0);
}

TEST(F1AtK, RejectsMismatchedRanges) {
    EXPECT_THROW(f1_at_k({{0, 10, 0}}, {{0, 12, 0}}, 10, SegmentScope::all), InputError);
    EXPECT_THROW(f1_at_k({{0, 5, 0}, {6, 10, 1}}, {{0, 10, 0}}, 10, SegmentScope::all), InputError);
}

TEST(F1AtK, NonIncreasingInK) {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t frames = 10 + rng() % 90;
        const Segs pred = oracle::random_partition(rng, frames, 10);
        const Segs gt = oracle::random_partition(rng, frames, 10);
        for (SegmentScope s : kAllScopes) {
            double prev = 101.0;
            for (double k = 0.0; k <= 100.0; k += 5.0) {
                const double f = f1_at_k(pred, gt, k, s).f1;
                ASSERT_LE(f, prev);
                prev = f;
            }
        }
    }
}

TEST(F1AtK, GreedyRarelyDivergesFromOptimal) {
    std::mt19937_64 rng(11);
    std::size_t diverged = 0, instances = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t frames = 6 + rng() % 60;
        const Segs pred = oracle::random_partition(rng, frames, 6);
        const Segs gt = oracle::random_partition(rng, frames, 6);
        const double k = static_cast<double>(rng() % 101);
        for (SegmentScope s : kAllScopes) {
            ++instances;
            const SegmentCounts c = match_segments(pred, gt, k, s);
            const std::size_t best = oracle::optimal_true_positives(pred, gt, k, s);
            ASSERT_LE(c.tp, best);
            ASSERT_EQ(c.tp + c.fp, oracle::count_in_scope(pred, s));
            ASSERT_EQ(c.tp + c.fn, oracle::count_in_scope(gt, s));
            if (c.tp != best) ++diverged;
        }
    }
    EXPECT_LT(static_cast<double>(diverged), 0.02 * static_cast<double>(instances));
}

TEST(FrameAuc, Examples) {
    EXPECT_DOUBLE_EQ(frame_auc({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1}), 0.75);
    EXPECT_DOUBLE_EQ(frame_auc({0.3, 0.3, 0.3}, {0, 1, 0}), 0.5);
    EXPECT_DOUBLE_EQ(frame_auc({0.1, 0.2, 0.9}, {0, 0, 1}), 1.0);
    EXPECT_DOUBLE_EQ(frame_auc({0.9, 0.2}, {0, 1}), 0.0);
}

TEST(FrameAuc, SingleClassIsUndefined) {
    EXPECT_THROW(frame_auc({0.1, 0.2}, {0, 0}), UndefinedMetricError);
    EXPECT_THROW(frame_auc({0.1, 0.2}, {1, 1}), UndefinedMetricError);
    EXPECT_THROW(frame_auc({0.1}, {0, 1}), InputError);
}

TEST(FrameAuc, MatchesPairwiseOracleAndIgnoresMonotoneTransforms) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 60;
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = std::round(u(rng) * 10.0) / 10.0;
            y[k] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        const double auc = frame_auc(s, y);
        EXPECT_NEAR(auc, oracle::pairwise_auc(s, y), 1e-12);
        std::vector<double> t(n);
        for (std::size_t k = 0; k < n; ++k) t[k] = std::exp(3.0 * s[k]) - 7.0;
        EXPECT_NEAR(frame_auc(t, y), auc, 1e-12);
    }
}

TEST(Evaluate, PerfectPredictions) {
    const std::vector<PredictedVideo> preds{{"a", {0.1, 0.9, 0.2}}};
    const std::vector<GroundTruthVideo> gts{{"a", {0, 0, 1, 1, 0, 0}}};
    const EvalReport r = evaluate(preds, gts, 2, {10, 25, 50});
    for (SegmentScope s : kAllScopes)
        for (double k : {10.0, 25.0, 50.0}) EXPECT_EQ(r.at(s, k).score.f1, 100.0);
    ASSERT_TRUE(r.frame_auc.has_value());
    EXPECT_EQ(*r.frame_auc, 1.0);
    EXPECT_EQ(r.num_frames, 6u);
}

TEST(Evaluate, PoolsCountsAcrossVideos) {
    const std::vector<PredictedVideo> preds{{"a", {0.1, 0.9, 0.2}}, {"b", {0.1, 0.1}}};
    const std::vector<GroundTruthVideo> gts{{"a", {0, 1, 0}}, {"b", {0, 0}}};
    const EvalReport r = evaluate(preds, gts, 1, {50});
    EXPECT_EQ(r.at(SegmentScope::normal, 50).counts, (SegmentCounts{3, 0, 0}));
    EXPECT_EQ(r.at(SegmentScope::abnormal, 50).counts, (SegmentCounts{1, 0, 0}));
    EXPECT_EQ(r.at(SegmentScope::all, 50).counts, (SegmentCounts{4, 0, 0}));
    EXPECT_EQ(r.num_videos, 2u);
}

TEST(Evaluate, PooledNotAveraged) {
    // video a: 1 TP of 1; video b: 0 TP, 1 FP, 3 FN in abnormal scope
    const std::vector<PredictedVideo> preds{{"a", {0, 1, 0}}, {"b", {1, 1, 1, 1, 1, 1, 1}}};
    const std::vector<GroundTruthVideo> gts{{"a", {0, 1, 0}}, {"b", {1, 0, 1, 0, 1, 0, 0}}};
    const EvalReport r = evaluate(preds, gts, 1, {50});
    const SegmentCounts c = r.at(SegmentScope::abnormal, 50).counts;
    EXPECT_EQ(c, (SegmentCounts{1, 1, 3}));
    const F1Score expected = score_from_counts(c);
    EXPECT_DOUBLE_EQ(r.at(SegmentScope::abnormal, 50).score.f1, expected.f1);
}

TEST(Evaluate, SingleClassCorpusHasNoAuc) {
    const EvalReport r = evaluate({{"a", {0.2, 0.3}}}, {{"a", {0, 0}}}, 1, {10});
    EXPECT_FALSE(r.frame_auc.has_value());
}

TEST(Evaluate, MissingVideoIsInputError) {
    EXPECT_THROW(evaluate({{"a", {0.2}}}, {{"b", {0}}}, 1, {10}), InputError);
    EXPECT_THROW(evaluate({{"a", {0.2}}, {"b", {0.2}}}, {{"a", {0}}}, 1, {10}), InputError);
    EXPECT_THROW(evaluate({{"a", {0.2}}, {"a", {0.2}}}, {{"a", {0}}}, 1, {10}), InputError);
}

TEST(Evaluate, FragmentedPredictionKeepsAucButLosesF1) {
    // gt: long abnormal run; pred: scores rank abnormal frames higher but
    // flicker around the threshold, shattering the segment.
    std::vector<int> labels(200, 0);
    std::fill(labels.begin() + 50, labels.begin() + 150, 1);
    std::vector<double> scores(200);
    for (std::size_t t = 0; t < 200; ++t) {
        const bool abnormal = labels[t] != 0;
        const bool flicker = t % 3 == 0;
        scores[t] = abnormal ? (flicker ? 0.45 : 0.7) : (t % 17 == 0 ? 0.55 : 0.2);
    }
    const EvalReport r = evaluate({{"v", scores}}, {{"v", labels}}, 1, {25});
    EXPECT_GE(*r.frame_auc, 0.70);
    EXPECT_LE(r.at(SegmentScope::abnormal, 25).score.f1, 35.0);
}
