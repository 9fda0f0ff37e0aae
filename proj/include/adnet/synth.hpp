#pragma once

#include <adnet/error.hpp>
#include <adnet/io.hpp>
#include <adnet/training.hpp>
#include <adnet/windowing.hpp>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace adnet::synth {

struct SynthConfig {
    std::size_t num_videos = 40;
    std::size_t clips_min = 48;
    std::size_t clips_max = 160;
    std::size_t abnormal_segments_min = 1;
    std::size_t abnormal_segments_max = 2;
    std::size_t feature_dim = 32;
    double class_mean_separation = 4.0;
    double noise_std = 1.0;
    std::size_t frames_per_clip = 16;
    std::uint64_t seed = 7;

    void validate() const {
        if (num_videos < 1) throw ConfigError("synth: num_videos must be >= 1");
        if (clips_min < 4) throw ConfigError("synth: clips_min must be >= 4");
        if (clips_max < clips_min) throw ConfigError("synth: clips_max must be >= clips_min");
        if (abnormal_segments_max < abnormal_segments_min) {
            throw ConfigError("synth: abnormal_segments_max must be >= abnormal_segments_min");
        }
        if (abnormal_segments_max < 1) throw ConfigError("synth: abnormal_segments_max must be >= 1");
        if (feature_dim < 1) throw ConfigError("synth: feature_dim must be >= 1");
        if (!(class_mean_separation >= 0.0)) throw ConfigError("synth: class_mean_separation must be >= 0");
        if (!(noise_std >= 0.0)) throw ConfigError("synth: noise_std must be >= 0");
        if (frames_per_clip < 1) throw ConfigError("synth: frames_per_clip must be >= 1");
    }
};

struct SyntheticVideo {
    ClipFeatureSequence features;
    io::AnnotationManifest annotation;
};

namespace detail {

inline std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Abnormal clip runs: the timeline is cut into equal slots and each slot
/// holds at most one run that never touches the slot edges, so runs are
/// always separated by normal clips.
inline std::vector<int> clip_labels(std::mt19937_64& rng, std::size_t clips, std::size_t segments) {
    std::vector<int> labels(clips, 0);
    while (segments > 1 && clips / segments < 4) --segments;
    const std::size_t slot = clips / segments;
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t max_len = std::max<std::size_t>(1, std::min(slot / 2, slot - 2));
        const std::size_t min_len = std::max<std::size_t>(1, slot / 5);
        const std::size_t len = uniform(rng, std::min(min_len, max_len), max_len);
        const std::size_t start = s * slot + uniform(rng, 1, slot - len - 1);
        std::fill_n(labels.begin() + static_cast<std::ptrdiff_t>(start), len, 1);
    }
    return labels;
}

} // namespace detail

/// Gaussian class-conditional clip features (mean -separation/2 on every
/// dimension for normal clips, +separation/2 for abnormal ones) with
/// clip-aligned abnormal segments. Deterministic for a given seed.
inline std::vector<SyntheticVideo> generate(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = cfg.frames_per_clip;
    std::vector<SyntheticVideo> corpus;
    corpus.reserve(cfg.num_videos);
    for (std::size_t v = 0; v < cfg.num_videos; ++v) {
        const std::size_t clips = detail::uniform(rng, cfg.clips_min, cfg.clips_max);
        const std::size_t segments = detail::uniform(rng, cfg.abnormal_segments_min, cfg.abnormal_segments_max);
        std::vector<int> labels = segments == 0 ? std::vector<int>(clips, 0) : detail::clip_labels(rng, clips, segments);
        const std::size_t total_frames = n * clips - detail::uniform(rng, 0, n - 1);

        char id[32];
        std::snprintf(id, sizeof id, "synth_%04zu", v);
        SyntheticVideo video;
        video.features.video_id = id;
        video.features.features = Tensor2(cfg.feature_dim, clips);
        for (std::size_t t = 0; t < clips; ++t) {
            const double mean = (labels[t] != 0 ? 0.5 : -0.5) * cfg.class_mean_separation;
            for (std::size_t d = 0; d < cfg.feature_dim; ++d) {
                // Stored at on-disk precision so files round-trip exactly.
                video.features.features(d, t) = static_cast<float>(mean + cfg.noise_std * noise(rng));
            }
        }

        io::AnnotationManifest& m = video.annotation;
        m.video_id = id;
        m.frames_per_clip = n;
        m.total_frames = total_frames;
        for (const TemporalSegment& s : segments_from_labels(labels)) {
            m.segments.push_back({s.start_frame * n, std::min(s.end_frame * n, total_frames), s.label});
        }
        corpus.push_back(std::move(video));
    }
    return corpus;
}

/// Pairs each video with clip targets derived from its annotation.
inline std::vector<LabeledSequence> labeled(const std::vector<SyntheticVideo>& corpus,
                                            double clip_label_fraction = 0.5) {
    std::vector<LabeledSequence> out;
    out.reserve(corpus.size());
    for (const SyntheticVideo& v : corpus) {
        out.push_back({v.features, clip_labels_from_frames(io::frame_labels(v.annotation),
                                                           v.annotation.frames_per_clip, clip_label_fraction)});
    }
    return out;
}

/// Writes `<out>/features/<id>.adnf` and `<out>/annotations/<id>.json`.
inline void write_corpus(const std::vector<SyntheticVideo>& corpus, const std::filesystem::path& out) {
    for (const SyntheticVideo& v : corpus) {
        io::write_features(v.features, out / "features" / (v.features.video_id + ".adnf"));
        io::write_annotations(v.annotation, out / "annotations" / (v.annotation.video_id + ".json"));
    }
}

} // namespace adnet::synth
