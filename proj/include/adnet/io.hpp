#pragma once

#include <adnet/adam.hpp>
#include <adnet/error.hpp>
#include <adnet/evaluation.hpp>
#include <adnet/model.hpp>
#include <adnet/training.hpp>
#include <adnet/version.hpp>
#include <adnet/windowing.hpp>

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace adnet::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

// --------------------------------------------------------------------------
// Little-endian byte encoding, independent of host byte order.

namespace le {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

/// Sequential reader over a byte buffer; every failure names the file and offset.
class Reader {
public:
    Reader(const std::string& bytes, std::string path) : bytes_(bytes), path_(std::move(path)) {}

    [[nodiscard]] std::size_t offset() const noexcept { return pos_; }
    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

    [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }
    [[noreturn]] void fail_at(std::size_t offset, const std::string& what) const {
        throw FormatError(path_ + ": byte offset " + std::to_string(offset) + ": " + what);
    }

    void need(std::size_t n, const std::string& what) const {
        if (remaining() < n) {
            fail("truncated " + what + ": expected " + std::to_string(n) + " bytes, found " +
                 std::to_string(remaining()));
        }
    }

    std::string bytes(std::size_t n, const std::string& what) {
        need(n, what);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= std::uint32_t{static_cast<unsigned char>(bytes_[pos_ + b])} << (8 * b);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64(const std::string& what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_ + b])} << (8 * b);
        pos_ += 8;
        return v;
    }

    float f32(const std::string& what) { return std::bit_cast<float>(u32(what)); }
    double f64(const std::string& what) { return std::bit_cast<double>(u64(what)); }

private:
    const std::string& bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace le

// --------------------------------------------------------------------------
// Files

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes via a sibling temporary file and a rename, so readers never observe
/// a partially written file.
inline void write_file_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError(tmp.string() + ": cannot open for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InputError(tmp.string() + ": write failed");
    }
    fs::rename(tmp, path);
}

/// Sorted list of regular files in `dir` with the given extension.
inline std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
    if (!fs::is_directory(dir)) throw InputError(dir.string() + ": not a directory");
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == extension) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline json parse_json(const std::string& text, const std::string& path) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": byte offset " + std::to_string(e.byte) + ": invalid JSON: " + e.what());
    }
}

/// Typed field access with the field name in every error message.
template <class T>
T field(const json& doc, const std::string& key, const std::string& path) {
    if (!doc.is_object() || !doc.contains(key)) throw FormatError(path + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(path + ": field '" + key + "': " + e.what());
    }
}

// --------------------------------------------------------------------------
// Feature files: "ADNF", u32 version, u32 num_clips, u32 dim, then
// num_clips * dim little-endian float32 values, clip-major.

inline constexpr char kFeatureMagic[4] = {'A', 'D', 'N', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

inline std::string encode_features(const ClipFeatureSequence& seq) {
    if (seq.num_clips() == 0 || seq.dim() == 0) throw InputError("write_features: empty sequence " + seq.video_id);
    std::string out(kFeatureMagic, 4);
    le::put_u32(out, kFeatureVersion);
    le::put_u32(out, static_cast<std::uint32_t>(seq.num_clips()));
    le::put_u32(out, static_cast<std::uint32_t>(seq.dim()));
    out.reserve(out.size() + 4 * seq.num_clips() * seq.dim());
    for (std::size_t t = 0; t < seq.num_clips(); ++t)
        for (std::size_t d = 0; d < seq.dim(); ++d) le::put_f32(out, static_cast<float>(seq.features(d, t)));
    return out;
}

inline ClipFeatureSequence decode_features(const std::string& bytes, const std::string& path, std::string video_id,
                                           std::optional<std::size_t> expected_dim = std::nullopt) {
    le::Reader r(bytes, path);
    if (r.bytes(4, "magic") != std::string(kFeatureMagic, 4)) r.fail_at(0, "bad magic, expected \"ADNF\"");
    const std::uint32_t version = r.u32("version");
    if (version != kFeatureVersion) {
        r.fail_at(4, "unsupported version " + std::to_string(version) + ", expected " + std::to_string(kFeatureVersion));
    }
    const std::uint32_t clips = r.u32("num_clips");
    if (clips == 0) r.fail_at(8, "num_clips is 0; empty sequences are not allowed");
    const std::uint32_t dim = r.u32("dim");
    if (dim == 0) r.fail_at(12, "dim is 0");
    if (expected_dim && *expected_dim != dim) {
        r.fail_at(12, "feature dim " + std::to_string(dim) + " does not match expected " + std::to_string(*expected_dim));
    }
    const std::size_t payload = std::size_t{4} * clips * dim;
    if (r.remaining() != payload) {
        r.fail("payload size mismatch: expected " + std::to_string(payload) + " bytes, found " +
               std::to_string(r.remaining()));
    }
    ClipFeatureSequence seq{std::move(video_id), Tensor2(dim, clips)};
    for (std::size_t t = 0; t < clips; ++t) {
        for (std::size_t d = 0; d < dim; ++d) {
            const std::size_t at = r.offset();
            const float v = r.f32("payload");
            if (!std::isfinite(v)) r.fail_at(at, "non-finite feature value");
            seq.features(d, t) = v;
        }
    }
    return seq;
}

inline void write_features(const ClipFeatureSequence& seq, const fs::path& path) {
    write_file_atomic(path, encode_features(seq));
}

/// The video id is the file stem.
inline ClipFeatureSequence read_features(const fs::path& path, std::optional<std::size_t> expected_dim = std::nullopt) {
    return decode_features(read_file(path), path.string(), path.stem().string(), expected_dim);
}

// --------------------------------------------------------------------------
// Annotation manifests (JSON):
//   {"video_id": ..., "frames_per_clip": 16, "total_frames": F,
//    "segments": [{"start_frame": 0, "end_frame": 160, "label": 0}, ...]}

struct AnnotationManifest {
    std::string video_id;
    std::size_t frames_per_clip = 16;
    std::size_t total_frames = 0;
    std::vector<TemporalSegment> segments;

    friend bool operator==(const AnnotationManifest&, const AnnotationManifest&) = default;
};

/// A parsed manifest with the labels derived from it.
struct Annotation {
    AnnotationManifest manifest;
    std::vector<int> frame_labels;
    LabelTimeline clip_labels;
};

inline json manifest_to_json(const AnnotationManifest& m) {
    json segs = json::array();
    for (const TemporalSegment& s : m.segments)
        segs.push_back({{"start_frame", s.start_frame}, {"end_frame", s.end_frame}, {"label", s.label}});
    return {{"video_id", m.video_id},
            {"frames_per_clip", m.frames_per_clip},
            {"total_frames", m.total_frames},
            {"segments", segs}};
}

/// Rejects gaps, overlaps, empty segments and bad labels, listing every
/// offending pair.
inline void validate_manifest(const AnnotationManifest& m, const std::string& path) {
    std::vector<std::string> problems;
    if (m.frames_per_clip < 1) problems.push_back("frames_per_clip must be >= 1");
    if (m.total_frames < 1) problems.push_back("total_frames must be >= 1");
    if (m.segments.empty()) problems.push_back("no segments");
    for (std::size_t k = 0; k < m.segments.size(); ++k) {
        const TemporalSegment& s = m.segments[k];
        if (s.label != 0 && s.label != 1) problems.push_back("segment " + std::to_string(k) + " has label " + std::to_string(s.label));
        if (s.end_frame <= s.start_frame) problems.push_back("segment " + std::to_string(k) + " is empty or reversed");
        if (k == 0 && s.start_frame != 0) problems.push_back("segment 0 starts at " + std::to_string(s.start_frame) + ", not 0");
        if (k > 0) {
            const TemporalSegment& prev = m.segments[k - 1];
            if (s.start_frame > prev.end_frame) {
                problems.push_back("gap between segments " + std::to_string(k - 1) + " and " + std::to_string(k) + " (frames " +
                                   std::to_string(prev.end_frame) + ".." + std::to_string(s.start_frame) + ")");
            } else if (s.start_frame < prev.end_frame) {
                problems.push_back("segments " + std::to_string(k - 1) + " and " + std::to_string(k) + " overlap (frames " +
                                   std::to_string(s.start_frame) + ".." + std::to_string(prev.end_frame) + ")");
            }
        }
    }
    if (!m.segments.empty() && m.segments.back().end_frame != m.total_frames) {
        problems.push_back("last segment ends at " + std::to_string(m.segments.back().end_frame) + " but total_frames is " +
                           std::to_string(m.total_frames));
    }
    if (!problems.empty()) {
        std::string msg = path + ": invalid segments:";
        for (const std::string& p : problems) msg += "\n  " + p;
        throw FormatError(msg);
    }
}

inline AnnotationManifest manifest_from_json(const json& doc, const std::string& path) {
    AnnotationManifest m;
    m.video_id = field<std::string>(doc, "video_id", path);
    m.frames_per_clip = doc.contains("frames_per_clip") ? field<std::size_t>(doc, "frames_per_clip", path) : 16;
    m.total_frames = field<std::size_t>(doc, "total_frames", path);
    const json segs = field<json>(doc, "segments", path);
    if (!segs.is_array()) throw FormatError(path + ": field 'segments' must be an array");
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const std::string where = path + " segments[" + std::to_string(k) + "]";
        m.segments.push_back({field<std::size_t>(segs[k], "start_frame", where), field<std::size_t>(segs[k], "end_frame", where),
                              field<int>(segs[k], "label", where)});
    }
    validate_manifest(m, path);
    return m;
}

inline std::vector<int> frame_labels(const AnnotationManifest& m) {
    std::vector<int> labels(m.total_frames, 0);
    for (const TemporalSegment& s : m.segments)
        std::fill(labels.begin() + static_cast<std::ptrdiff_t>(s.start_frame),
                  labels.begin() + static_cast<std::ptrdiff_t>(s.end_frame), s.label);
    return labels;
}

inline Annotation read_annotations(const fs::path& path, double clip_label_fraction = 0.5) {
    Annotation a;
    a.manifest = manifest_from_json(parse_json(read_file(path), path.string()), path.string());
    a.frame_labels = frame_labels(a.manifest);
    a.clip_labels = clip_labels_from_frames(a.frame_labels, a.manifest.frames_per_clip, clip_label_fraction);
    return a;
}

inline void write_annotations(const AnnotationManifest& m, const fs::path& path) {
    validate_manifest(m, path.string());
    write_file_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

// --------------------------------------------------------------------------
// Configuration documents

inline json to_json(const ADNetConfig& c) {
    return {{"window_width", c.window_width}, {"num_stages", c.num_stages}, {"num_layers", c.num_layers},
            {"kernel_size", c.kernel_size},   {"hidden_channels", c.hidden_channels}, {"input_dim", c.input_dim},
            {"threshold", c.threshold}};
}

inline ADNetConfig model_config_from_json(const json& j, const std::string& where) {
    ADNetConfig c;
    c.window_width = field<std::size_t>(j, "window_width", where);
    c.num_stages = field<std::size_t>(j, "num_stages", where);
    c.num_layers = field<std::size_t>(j, "num_layers", where);
    c.kernel_size = field<std::size_t>(j, "kernel_size", where);
    c.hidden_channels = field<std::size_t>(j, "hidden_channels", where);
    c.input_dim = field<std::size_t>(j, "input_dim", where);
    c.threshold = field<double>(j, "threshold", where);
    return c;
}

inline json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"lambda", c.lambda}, {"alpha", c.alpha}, {"epochs", c.epochs},
            {"seed", c.seed}, {"use_ad_loss", c.use_ad_loss}, {"clip_label_fraction", c.clip_label_fraction}};
}

inline TrainConfig train_config_from_json(const json& j, const std::string& where) {
    TrainConfig c;
    c.learning_rate = field<double>(j, "learning_rate", where);
    c.lambda = field<double>(j, "lambda", where);
    c.alpha = field<double>(j, "alpha", where);
    c.epochs = field<std::size_t>(j, "epochs", where);
    c.seed = field<std::uint64_t>(j, "seed", where);
    c.use_ad_loss = field<bool>(j, "use_ad_loss", where);
    c.clip_label_fraction = field<double>(j, "clip_label_fraction", where);
    return c;
}

// --------------------------------------------------------------------------
// Checkpoints: "ADNC", u32 format version, u64 header length, JSON header,
// u32 tensor count, then per tensor: u32 name length, name, u32 rows,
// u32 cols, rows * cols little-endian float64.

inline constexpr char kCheckpointMagic[4] = {'A', 'D', 'N', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelParams params;
    TrainConfig train;
    std::size_t frames_per_clip = 16;
    std::size_t epochs_completed = 0;
    std::optional<AdamState> adam; // present when the file can resume training
};

inline std::string encode_checkpoint(const Checkpoint& ck) {
    const auto named = ck.params.named_params();
    json header = {{"format_version", kCheckpointVersion},
                   {"tool_version", kToolVersion},
                   {"model", to_json(ck.params.config)},
                   {"train", to_json(ck.train)},
                   {"seed", ck.train.seed},
                   {"frames_per_clip", ck.frames_per_clip},
                   {"epochs_completed", ck.epochs_completed},
                   {"adam_state", ck.adam.has_value()}};
    if (ck.adam) {
        header["adam"] = {{"step_count", ck.adam->step_count}, {"lr", ck.adam->options.lr},
                          {"beta1", ck.adam->options.beta1}, {"beta2", ck.adam->options.beta2},
                          {"epsilon", ck.adam->options.epsilon}};
        if (ck.adam->first_moment.size() != named.size()) throw ConfigError("save_checkpoint: Adam state does not match parameters");
    }

    std::vector<std::pair<std::string, const Tensor2*>> blobs;
    for (const auto& [name, p] : named) blobs.emplace_back(name, &p->value);
    if (ck.adam) {
        for (std::size_t k = 0; k < named.size(); ++k) blobs.emplace_back("adam.m/" + named[k].first, &ck.adam->first_moment[k]);
        for (std::size_t k = 0; k < named.size(); ++k) blobs.emplace_back("adam.v/" + named[k].first, &ck.adam->second_moment[k]);
    }

    const std::string header_text = header.dump();
    std::string out(kCheckpointMagic, 4);
    le::put_u32(out, kCheckpointVersion);
    le::put_u64(out, header_text.size());
    out += header_text;
    le::put_u32(out, static_cast<std::uint32_t>(blobs.size()));
    for (const auto& [name, t] : blobs) {
        le::put_u32(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        le::put_u32(out, static_cast<std::uint32_t>(t->channels()));
        le::put_u32(out, static_cast<std::uint32_t>(t->length()));
        for (double v : t->values()) le::put_f64(out, v);
    }
    return out;
}

/// Decodes a checkpoint. When `expected` is given, the stored model
/// configuration must match it (input_dim 0 in `expected` matches any).
inline Checkpoint decode_checkpoint(const std::string& bytes, const std::string& path,
                                    std::optional<ADNetConfig> expected = std::nullopt) {
    le::Reader r(bytes, path);
    if (r.bytes(4, "magic") != std::string(kCheckpointMagic, 4)) r.fail_at(0, "bad magic, expected \"ADNC\"");
    const std::uint32_t version = r.u32("format version");
    if (version != kCheckpointVersion) {
        r.fail_at(4, "unsupported checkpoint version " + std::to_string(version) + ", expected " +
                         std::to_string(kCheckpointVersion));
    }
    const std::uint64_t header_len = r.u64("header length");
    const json header = parse_json(r.bytes(static_cast<std::size_t>(header_len), "header"), path + " (header)");

    Checkpoint ck;
    ADNetConfig cfg = model_config_from_json(field<json>(header, "model", path), path + " model");
    ck.train = train_config_from_json(field<json>(header, "train", path), path + " train");
    ck.frames_per_clip = field<std::size_t>(header, "frames_per_clip", path);
    ck.epochs_completed = field<std::size_t>(header, "epochs_completed", path);
    const bool has_adam = field<bool>(header, "adam_state", path);

    if (expected) {
        ADNetConfig want = *expected;
        if (want.input_dim == 0) want.input_dim = cfg.input_dim;
        want.threshold = cfg.threshold;
        if (!(want == cfg)) {
            throw ConfigError(path + ": checkpoint is incompatible with the requested model configuration (stored " +
                              to_json(cfg).dump() + ", requested " + to_json(want).dump() + ")");
        }
    }
    try {
        ck.params = allocate(cfg);
    } catch (const ConfigError& e) {
        throw FormatError(path + ": field 'model': " + e.what());
    }
    auto named = ck.params.named_params();

    std::vector<std::pair<std::string, Tensor2*>> expected_blobs;
    for (auto& [name, p] : named) expected_blobs.emplace_back(name, &p->value);
    if (has_adam) {
        const json a = field<json>(header, "adam", path);
        AdamState st;
        st.step_count = field<std::uint64_t>(a, "step_count", path + " adam");
        st.options = {field<double>(a, "lr", path + " adam"), field<double>(a, "beta1", path + " adam"),
                      field<double>(a, "beta2", path + " adam"), field<double>(a, "epsilon", path + " adam")};
        for (auto& [name, p] : named) {
            st.first_moment.emplace_back(p->value.channels(), p->value.length());
            st.second_moment.emplace_back(p->value.channels(), p->value.length());
        }
        ck.adam = std::move(st);
        for (std::size_t k = 0; k < named.size(); ++k) expected_blobs.emplace_back("adam.m/" + named[k].first, &ck.adam->first_moment[k]);
        for (std::size_t k = 0; k < named.size(); ++k) expected_blobs.emplace_back("adam.v/" + named[k].first, &ck.adam->second_moment[k]);
    }

    std::map<std::string, Tensor2*> targets;
    for (auto& [name, t] : expected_blobs) targets[name] = t;
    std::set<std::string> seen;

    const std::uint32_t count = r.u32("tensor count");
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t name_len = r.u32("tensor name length");
        const std::string name = r.bytes(name_len, "tensor name");
        const std::size_t shape_at = r.offset();
        const std::uint32_t rows = r.u32("rows of " + name);
        const std::uint32_t cols = r.u32("cols of " + name);
        auto it = targets.find(name);
        if (it == targets.end()) r.fail_at(shape_at, "unexpected tensor '" + name + "' for this configuration");
        if (!seen.insert(name).second) r.fail_at(shape_at, "duplicate tensor '" + name + "'");
        Tensor2& dst = *it->second;
        if (rows != dst.channels() || cols != dst.length()) {
            r.fail_at(shape_at, "shape mismatch for tensor '" + name + "': expected " + dst.shape_string() + ", found " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
        }
        for (double& v : dst.values()) {
            const std::size_t at = r.offset();
            v = r.f64("data of " + name);
            if (!std::isfinite(v)) r.fail_at(at, "non-finite value in tensor '" + name + "'");
        }
    }
    for (const auto& [name, t] : expected_blobs) {
        if (!seen.contains(name)) throw FormatError(path + ": missing tensor '" + name + "'");
    }
    if (r.remaining() != 0) r.fail("trailing " + std::to_string(r.remaining()) + " bytes after last tensor");
    return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const fs::path& path) {
    write_file_atomic(path, encode_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const fs::path& path, std::optional<ADNetConfig> expected = std::nullopt) {
    if (!fs::exists(path)) throw InputError(path.string() + ": checkpoint not found");
    return decode_checkpoint(read_file(path), path.string(), expected);
}

// --------------------------------------------------------------------------
// Score timelines (JSON, one document per video)

struct ScoreTimeline {
    std::string video_id;
    std::size_t frames_per_clip = 16;
    double threshold = 0.5;
    std::vector<double> clip_scores;
    std::vector<double> frame_scores;
};

inline json to_json(const ScoreTimeline& s, const json& resolved_config) {
    std::vector<int> labels(s.clip_scores.size());
    for (std::size_t t = 0; t < labels.size(); ++t) labels[t] = s.clip_scores[t] >= s.threshold ? 1 : 0;
    return {{"tool_version", kToolVersion}, {"config", resolved_config},   {"video_id", s.video_id},
            {"frames_per_clip", s.frames_per_clip}, {"threshold", s.threshold},
            {"num_clips", s.clip_scores.size()},    {"clip_scores", s.clip_scores},
            {"clip_labels", labels},                {"frame_scores", s.frame_scores}};
}

inline ScoreTimeline read_score_timeline(const fs::path& path) {
    const std::string p = path.string();
    const json doc = parse_json(read_file(path), p);
    ScoreTimeline s;
    s.video_id = field<std::string>(doc, "video_id", p);
    s.frames_per_clip = field<std::size_t>(doc, "frames_per_clip", p);
    s.threshold = field<double>(doc, "threshold", p);
    s.clip_scores = field<std::vector<double>>(doc, "clip_scores", p);
    if (doc.contains("frame_scores")) s.frame_scores = field<std::vector<double>>(doc, "frame_scores", p);
    if (s.clip_scores.empty()) throw FormatError(p + ": field 'clip_scores' is empty");
    for (double v : s.clip_scores)
        if (!(v >= 0.0 && v <= 1.0)) throw FormatError(p + ": field 'clip_scores' holds a value outside [0, 1]");
    return s;
}

// --------------------------------------------------------------------------
// Evaluation reports. Fields are emitted in a fixed order.

inline json to_json(const EvalReport& r, const json& resolved_config) {
    json doc = json::object();
    doc["tool_version"] = kToolVersion;
    doc["config"] = resolved_config;
    doc["num_videos"] = r.num_videos;
    doc["num_frames"] = r.num_frames;
    doc["frame_auc"] = r.frame_auc ? json(*r.frame_auc) : json(nullptr);
    json scopes = json::array();
    for (SegmentScope s : kAllScopes) {
        json entries = json::array();
        for (const ScopeResult& e : r.scopes.at(s)) {
            entries.push_back({{"k", e.k}, {"precision", e.score.precision}, {"recall", e.score.recall},
                               {"f1", e.score.f1}, {"tp", e.counts.tp}, {"fp", e.counts.fp}, {"fn", e.counts.fn}});
        }
        scopes.push_back({{"scope", std::string(scope_name(s))}, {"results", entries}});
    }
    doc["scopes"] = scopes;
    return doc;
}

} // namespace adnet::io
