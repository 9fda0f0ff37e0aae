#pragma once

#include <adnet/error.hpp>
#include <adnet/evaluation.hpp>
#include <adnet/io.hpp>
#include <adnet/model.hpp>
#include <adnet/synth.hpp>
#include <adnet/training.hpp>
#include <adnet/version.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace adnet::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Flat run configuration. Every key of the JSON config file maps to one
/// field here; unknown keys are rejected.
struct RunConfig {
    ADNetConfig model;
    TrainConfig train{.seed = 7};
    synth::SynthConfig synth;
    std::size_t frames_per_clip = 16;
    std::string features_dir;
    std::string annotations_dir;
    std::string checkpoint;
    std::string output_dir;

    [[nodiscard]] json to_json() const {
        json j = io::to_json(model);
        j.erase("input_dim");
        for (auto& [k, v] : io::to_json(train).items()) j[k] = v;
        j["frames_per_clip"] = frames_per_clip;
        j["num_videos"] = synth.num_videos;
        j["clips_min"] = synth.clips_min;
        j["clips_max"] = synth.clips_max;
        j["abnormal_segments_min"] = synth.abnormal_segments_min;
        j["abnormal_segments_max"] = synth.abnormal_segments_max;
        j["feature_dim"] = synth.feature_dim;
        j["class_mean_separation"] = synth.class_mean_separation;
        j["noise_std"] = synth.noise_std;
        j["features_dir"] = features_dir;
        j["annotations_dir"] = annotations_dir;
        j["checkpoint"] = checkpoint;
        j["output_dir"] = output_dir;
        return j;
    }
};

/// Applies a JSON object on top of `cfg`. Throws ConfigError naming the first
/// unknown key or the first key with a value of the wrong type.
inline void apply_config(RunConfig& cfg, const json& doc, const std::string& source) {
    if (!doc.is_object()) throw ConfigError(source + ": config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        auto get = [&]<class T>(T& dst) {
            try {
                dst = value.get<T>();
            } catch (const json::exception&) {
                throw ConfigError(source + ": config key '" + key + "' has the wrong type");
            }
        };
        if (key == "window_width") get(cfg.model.window_width);
        else if (key == "num_stages") get(cfg.model.num_stages);
        else if (key == "num_layers") get(cfg.model.num_layers);
        else if (key == "kernel_size") get(cfg.model.kernel_size);
        else if (key == "hidden_channels") get(cfg.model.hidden_channels);
        else if (key == "threshold") get(cfg.model.threshold);
        else if (key == "learning_rate") get(cfg.train.learning_rate);
        else if (key == "lambda") get(cfg.train.lambda);
        else if (key == "alpha") get(cfg.train.alpha);
        else if (key == "epochs") get(cfg.train.epochs);
        else if (key == "seed") get(cfg.train.seed);
        else if (key == "use_ad_loss") get(cfg.train.use_ad_loss);
        else if (key == "clip_label_fraction") get(cfg.train.clip_label_fraction);
        else if (key == "frames_per_clip") get(cfg.frames_per_clip);
        else if (key == "num_videos") get(cfg.synth.num_videos);
        else if (key == "clips_min") get(cfg.synth.clips_min);
        else if (key == "clips_max") get(cfg.synth.clips_max);
        else if (key == "abnormal_segments_min") get(cfg.synth.abnormal_segments_min);
        else if (key == "abnormal_segments_max") get(cfg.synth.abnormal_segments_max);
        else if (key == "feature_dim") get(cfg.synth.feature_dim);
        else if (key == "class_mean_separation") get(cfg.synth.class_mean_separation);
        else if (key == "noise_std") get(cfg.synth.noise_std);
        else if (key == "features_dir") get(cfg.features_dir);
        else if (key == "annotations_dir") get(cfg.annotations_dir);
        else if (key == "checkpoint") get(cfg.checkpoint);
        else if (key == "output_dir") get(cfg.output_dir);
        else throw ConfigError(source + ": unknown config key '" + key + "'");
    }
    cfg.synth.seed = cfg.train.seed;
    cfg.synth.frames_per_clip = cfg.frames_per_clip;
}

inline RunConfig load_run_config(const std::optional<std::string>& path) {
    RunConfig cfg;
    cfg.synth.seed = cfg.train.seed;
    if (!path) return cfg;
    json doc;
    try {
        doc = json::parse(io::read_file(*path));
    } catch (const json::parse_error& e) {
        throw ConfigError(*path + ": byte offset " + std::to_string(e.byte) + ": invalid JSON config");
    }
    apply_config(cfg, doc, *path);
    return cfg;
}

/// Loads every `<id>.adnf` under features_dir with its `<id>.json` manifest.
inline std::vector<LabeledSequence> load_labeled_corpus(const RunConfig& cfg, std::size_t* frames_per_clip = nullptr) {
    if (cfg.features_dir.empty()) throw ConfigError("config key 'features_dir' is required");
    if (cfg.annotations_dir.empty()) throw ConfigError("config key 'annotations_dir' is required");
    std::vector<LabeledSequence> corpus;
    std::optional<std::size_t> dim;
    for (const fs::path& fp : io::list_files(cfg.features_dir, ".adnf")) {
        LabeledSequence item;
        item.sequence = io::read_features(fp, dim);
        dim = item.sequence.dim();
        const fs::path ap = fs::path(cfg.annotations_dir) / (item.sequence.video_id + ".json");
        if (!fs::exists(ap)) throw InputError(ap.string() + ": missing annotation for video " + item.sequence.video_id);
        io::Annotation ann = io::read_annotations(ap, cfg.train.clip_label_fraction);
        if (ann.clip_labels.size() != item.sequence.num_clips()) {
            throw InputError(ap.string() + ": annotation spans " + std::to_string(ann.clip_labels.size()) +
                             " clips but features have " + std::to_string(item.sequence.num_clips()));
        }
        if (frames_per_clip) *frames_per_clip = ann.manifest.frames_per_clip;
        item.labels = std::move(ann.clip_labels);
        corpus.push_back(std::move(item));
    }
    if (corpus.empty()) throw InputError(cfg.features_dir + ": no .adnf feature files");
    return corpus;
}

inline int cmd_synth(const std::optional<std::string>& config_path, const std::string& out_dir, std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path);
    const auto corpus = synth::generate(cfg.synth);
    synth::write_corpus(corpus, out_dir);
    out << "wrote " << corpus.size() << " videos to " << out_dir << "\n";
    return kOk;
}

inline std::string log_line(const EpochLog& e) {
    return json{{"epoch", e.epoch}, {"mse", e.mean_mse}, {"ad", e.mean_ad}, {"total", e.mean_total}}.dump();
}

inline int cmd_train(const std::string& config_path, bool resume, std::ostream& out) {
    const RunConfig cfg = load_run_config(config_path);
    if (cfg.checkpoint.empty()) throw ConfigError("config key 'checkpoint' is required");
    std::size_t n = cfg.frames_per_clip;
    const std::vector<LabeledSequence> corpus = load_labeled_corpus(cfg, &n);

    ADNetConfig model_cfg = cfg.model;
    model_cfg.input_dim = corpus.front().sequence.dim();
    model_cfg.validate();

    std::optional<TrainState> state;
    if (resume) {
        io::Checkpoint ck = io::load_checkpoint(cfg.checkpoint, model_cfg);
        if (!ck.adam) throw InputError(cfg.checkpoint + ": checkpoint carries no optimizer state to resume from");
        state = TrainState{std::move(ck.params), std::move(*ck.adam), ck.epochs_completed};
    }

    std::optional<std::ofstream> log_file;
    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        log_file.emplace(fs::path(cfg.output_dir) / "train_log.jsonl", resume ? std::ios::app : std::ios::trunc);
    }
    TrainResult result = train(corpus, model_cfg, cfg.train, std::move(state), [&](const EpochLog& e) {
        const std::string line = log_line(e);
        out << line << "\n" << std::flush;
        if (log_file) *log_file << line << "\n" << std::flush;
    });

    io::Checkpoint ck;
    ck.params = std::move(result.state.params);
    ck.train = cfg.train;
    ck.frames_per_clip = n;
    ck.epochs_completed = result.state.epochs_completed;
    ck.adam = std::move(result.state.adam);
    io::save_checkpoint(ck, cfg.checkpoint);
    return kOk;
}

inline int cmd_infer(const std::string& checkpoint, const std::string& features, const std::string& out_dir,
                     std::optional<double> threshold, std::ostream& out) {
    const io::Checkpoint ck = io::load_checkpoint(checkpoint);
    const double thr = threshold.value_or(ck.params.config.threshold);
    if (!(thr > 0.0 && thr < 1.0)) throw ConfigError("--threshold must lie in (0, 1)");

    std::vector<fs::path> inputs;
    if (fs::is_directory(features)) inputs = io::list_files(features, ".adnf");
    else if (fs::exists(features)) inputs.push_back(features);
    else throw InputError(features + ": no such file or directory");
    if (inputs.empty()) throw InputError(features + ": no .adnf feature files");

    json resolved = {{"model", io::to_json(ck.params.config)}, {"train", io::to_json(ck.train)},
                     {"checkpoint", checkpoint}, {"threshold", thr}, {"frames_per_clip", ck.frames_per_clip},
                     {"epochs_completed", ck.epochs_completed}};
    for (const fs::path& fp : inputs) {
        const ClipFeatureSequence seq = io::read_features(fp, ck.params.config.input_dim);
        io::ScoreTimeline tl;
        tl.video_id = seq.video_id;
        tl.frames_per_clip = ck.frames_per_clip;
        tl.threshold = thr;
        tl.clip_scores = score_sequence(ck.params, seq);
        tl.frame_scores = expand_to_frames(tl.clip_scores, tl.frames_per_clip, tl.frames_per_clip * seq.num_clips());
        io::write_file_atomic(fs::path(out_dir) / (seq.video_id + ".json"), io::to_json(tl, resolved).dump(2) + "\n");
    }
    out << "scored " << inputs.size() << " videos into " << out_dir << "\n";
    return kOk;
}

inline std::vector<double> parse_ks(const std::string& text) {
    std::vector<double> ks;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double k = std::stod(item, &used);
            if (used != item.size() || !(k > 0.0 && k <= 100.0)) throw std::invalid_argument(item);
            ks.push_back(k);
        } catch (const std::exception&) {
            throw ConfigError("--k: '" + item + "' is not a percentage in (0, 100]");
        }
    }
    if (ks.empty()) throw ConfigError("--k: no values");
    return ks;
}

inline int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& ks_text,
                    std::ostream& out) {
    const std::vector<double> ks = parse_ks(ks_text);
    std::vector<GroundTruthVideo> gts;
    std::optional<std::size_t> n;
    for (const fs::path& p : io::list_files(gt_dir, ".json")) {
        io::Annotation a = io::read_annotations(p);
        if (n && *n != a.manifest.frames_per_clip) throw InputError(p.string() + ": frames_per_clip differs from other manifests");
        n = a.manifest.frames_per_clip;
        gts.push_back({a.manifest.video_id, std::move(a.frame_labels)});
    }
    if (gts.empty()) throw InputError(gt_dir + ": no annotation manifests");

    std::vector<PredictedVideo> preds;
    std::optional<double> threshold;
    for (const fs::path& p : io::list_files(pred_dir, ".json")) {
        io::ScoreTimeline tl = io::read_score_timeline(p);
        if (threshold && *threshold != tl.threshold) throw InputError(p.string() + ": threshold differs from other predictions");
        threshold = tl.threshold;
        preds.push_back({tl.video_id, std::move(tl.clip_scores)});
    }
    if (preds.empty()) throw InputError(pred_dir + ": no prediction documents");

    const EvalReport report = evaluate(preds, gts, *n, ks, *threshold);
    const json resolved = {{"pred", pred_dir}, {"gt", gt_dir}, {"ks", ks}, {"threshold", *threshold},
                           {"frames_per_clip", *n}};
    out << io::to_json(report, resolved).dump(2) << "\n";
    return kOk;
}

/// Maps library errors onto the documented exit codes.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const UsageError*>(&e)) return kUsage;
    if (dynamic_cast<const NumericError*>(&e)) return kNumeric;
    return kData;
}

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Temporal anomaly localization on precomputed clip features", "adnet"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::optional<std::string> synth_config;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic feature/annotation corpus");
    synth_cmd->add_option("--config", synth_config, "JSON run config");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    std::string train_config;
    bool resume = false;
    auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
    train_cmd->add_option("--config", train_config, "JSON run config")->required();
    train_cmd->add_flag("--resume", resume, "Continue from the configured checkpoint");

    std::string checkpoint, features, infer_out;
    std::optional<double> threshold;
    auto* infer_cmd = app.add_subcommand("infer", "Score feature files with a trained checkpoint");
    infer_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    infer_cmd->add_option("--features", features, "Feature file or directory of .adnf files")->required();
    infer_cmd->add_option("--out", infer_out, "Output directory for score timelines")->required();
    infer_cmd->add_option("--threshold", threshold, "Decision threshold (default: from checkpoint)");

    std::string pred_dir, gt_dir, ks = "10,25,50";
    auto* eval_cmd = app.add_subcommand("eval", "Segmental F1@k and frame AUC of predictions");
    eval_cmd->add_option("--pred", pred_dir, "Directory of score timelines")->required();
    eval_cmd->add_option("--gt", gt_dir, "Directory of annotation manifests")->required();
    eval_cmd->add_option("--k", ks, "Comma-separated IoU percentages")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth_config, synth_out, out);
        if (train_cmd->parsed()) return cmd_train(train_config, resume, out);
        if (infer_cmd->parsed()) return cmd_infer(checkpoint, features, infer_out, threshold, out);
        if (eval_cmd->parsed()) return cmd_eval(pred_dir, gt_dir, ks, out);
    } catch (const std::exception& e) {
        err << "adnet: error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kUsage;
}

} // namespace adnet::cli
