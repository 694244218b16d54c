#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fstnet/data.hpp"
#include "fstnet/metrics.hpp"
#include "fstnet/model.hpp"
#include "fstnet/optim.hpp"
#include "fstnet/serialize.hpp"

namespace fstnet {

struct TrainConfig {
    int epochs = 10;
    int warmup_epochs = 5;
    double lr_spatial = 0.3;   // cosine decay to zero
    double lr_freq = 0.03;     // linear warmup, then hold
    double wd_spatial = 1e-4;
    double wd_freq = 1e-5;
    int batch_size = 16;
    int seq_len = 10;
    std::uint64_t seed = 0;
    double lambda_depth = 1.0;
    int image_size = 256;
    double width_multiplier = 1.0;
    // spatial group counts as frozen once its lr falls below this fraction
    // of the base rate
    double freeze_ratio = 1e-5;

    void validate() const {
        require(epochs >= 0, "TrainConfig: epochs must be >= 0");
        require(warmup_epochs >= 0 && warmup_epochs <= epochs,
                "TrainConfig: need 0 <= warmup_epochs <= epochs, got ", warmup_epochs, "/",
                epochs);
        require(lr_spatial >= 0.0 && lr_freq >= 0.0, "TrainConfig: learning rates must be >= 0");
        require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
        require(seq_len >= 1, "TrainConfig: seq_len must be >= 1");
    }

    NetworkConfig network() const {
        NetworkConfig n;
        n.image_size = image_size;
        n.seq_len = seq_len;
        n.width_multiplier = width_multiplier;
        return n;
    }
};

// key=value config file, one pair per line, '#' comments.
inline TrainConfig load_train_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    require_data(is.good(), "config: cannot open ", path.string());
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require_data(eq != std::string::npos, "config: expected key=value at ", path.string(),
                     ":", lineno);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "epochs") cfg.epochs = std::stoi(val);
            else if (key == "warmup_epochs") cfg.warmup_epochs = std::stoi(val);
            else if (key == "lr_spatial") cfg.lr_spatial = std::stod(val);
            else if (key == "lr_freq") cfg.lr_freq = std::stod(val);
            else if (key == "wd_spatial") cfg.wd_spatial = std::stod(val);
            else if (key == "wd_freq") cfg.wd_freq = std::stod(val);
            else if (key == "batch_size") cfg.batch_size = std::stoi(val);
            else if (key == "seq_len") cfg.seq_len = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "lambda_depth") cfg.lambda_depth = std::stod(val);
            else if (key == "image_size") cfg.image_size = std::stoi(val);
            else if (key == "width_multiplier") cfg.width_multiplier = std::stod(val);
            else if (key == "freeze_ratio") cfg.freeze_ratio = std::stod(val);
            else throw DataError("config: unknown key '" + key + "' at " + path.string() + ":" +
                                 std::to_string(lineno));
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("config: bad value for '" + key + "' at " + path.string() + ":" +
                            std::to_string(lineno));
        }
    }
    return cfg;
}

inline void save_train_config(const std::filesystem::path& path, const TrainConfig& cfg) {
    std::ofstream os(path, std::ios::trunc);
    require_data(os.good(), "config: cannot write ", path.string());
    os.precision(17);
    os << "epochs=" << cfg.epochs << "\n"
       << "warmup_epochs=" << cfg.warmup_epochs << "\n"
       << "lr_spatial=" << cfg.lr_spatial << "\n"
       << "lr_freq=" << cfg.lr_freq << "\n"
       << "wd_spatial=" << cfg.wd_spatial << "\n"
       << "wd_freq=" << cfg.wd_freq << "\n"
       << "batch_size=" << cfg.batch_size << "\n"
       << "seq_len=" << cfg.seq_len << "\n"
       << "seed=" << cfg.seed << "\n"
       << "lambda_depth=" << cfg.lambda_depth << "\n"
       << "image_size=" << cfg.image_size << "\n"
       << "width_multiplier=" << cfg.width_multiplier << "\n"
       << "freeze_ratio=" << cfg.freeze_ratio << "\n";
    require_data(os.good(), "config: write failed for ", path.string());
}

// Every parameter lands in exactly one group, keyed by its name prefix:
// "spatial." in the first, "freq." / "temporal." / "fusion." in the second.
// Unknown prefixes are rejected rather than silently skipped.
template <typename T>
std::pair<std::vector<VarT<T>>, std::vector<VarT<T>>> partition_parameters(
    const std::vector<VarT<T>>& params) {
    std::vector<VarT<T>> spatial_group, freq_group;
    for (const auto& p : params) {
        require(!p->name.empty(), "partition_parameters: unnamed parameter");
        const auto dot = p->name.find('.');
        const std::string prefix = p->name.substr(0, dot);
        if (prefix == "spatial")
            spatial_group.push_back(p);
        else if (prefix == "freq" || prefix == "temporal" || prefix == "fusion")
            freq_group.push_back(p);
        else
            require(false, "partition_parameters: parameter '", p->name,
                    "' has no learning-rate group");
    }
    return {std::move(spatial_group), std::move(freq_group)};
}

struct StepRecord {
    int step = 0;
    double lr_spatial = 0.0, lr_freq = 0.0;
    double loss = 0.0;  // batch mean
};

struct EpochRecord {
    int epoch = 0;
    double lr_spatial = 0.0, lr_freq = 0.0;  // at the first step of the epoch
    double mean_loss = 0.0;
    double train_acer = 0.0;  // at threshold 0.5 on the epoch's own scores
};

struct TrainLog {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
};

inline void save_epoch_log_csv(const std::filesystem::path& path, const TrainLog& log) {
    std::ofstream os(path, std::ios::trunc);
    require_data(os.good(), "train log: cannot write ", path.string());
    os << "epoch,lr_spatial,lr_freq,loss,acer\n";
    os.precision(17);
    for (const auto& e : log.epochs)
        os << e.epoch << "," << e.lr_spatial << "," << e.lr_freq << "," << e.mean_loss << ","
           << e.train_acer << "\n";
    require_data(os.good(), "train log: write failed for ", path.string());
}

namespace detail {

template <typename T>
double spoof_probability(const VarT<T>& logits) {
    const T a = logits->value.data[0];
    const T b = logits->value.data[1];
    const T m = std::max(a, b);
    const double ea = std::exp(static_cast<double>(a - m));
    const double eb = std::exp(static_cast<double>(b - m));
    return eb / (ea + eb);
}

}  // namespace detail

// Deterministic single-threaded loop. Per step: per-sequence forward,
// combined loss scaled by 1/batch, backward, then one SGD step per group at
// its scheduled rate. epoch_fraction runs over step/(total_steps-1) so the
// first step sees the base rates and the last step the schedule endpoints.
template <typename T>
TrainLog train(FreqSpatialTempNetT<T>& model, const DatasetManifest& manifest,
               const TrainConfig& cfg) {
    cfg.validate();
    require(model.config().seq_len == cfg.seq_len && model.config().image_size == cfg.image_size,
            "train: model config does not match TrainConfig");
    const std::vector<ManifestEntry> entries = manifest.split_entries("train");
    require(!entries.empty(), "train: empty train split");

    auto [spatial_group, freq_group] = partition_parameters(model.parameters());

    const LrSchedule spatial_sched{LrKind::Cosine, cfg.lr_spatial, std::max(cfg.epochs, 1), 0};
    const LrSchedule freq_sched{LrKind::WarmupHold, cfg.lr_freq, std::max(cfg.epochs, 1),
                                cfg.warmup_epochs};

    const int steps_per_epoch =
        static_cast<int>((entries.size() + cfg.batch_size - 1) / cfg.batch_size);
    const long total_steps = static_cast<long>(cfg.epochs) * steps_per_epoch;

    TrainLog log;
    Rng order_rng(derive_seed(cfg.seed, "batch-order"));
    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<ManifestEntry> order = entries;
        order_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::vector<ScoreRecord> epoch_scores;
        epoch_scores.reserve(order.size());
        double epoch_lr_spatial = 0.0, epoch_lr_freq = 0.0;

        for (std::size_t base = 0; base < order.size(); base += cfg.batch_size, ++step) {
            const std::size_t batch_n = std::min<std::size_t>(cfg.batch_size, order.size() - base);
            const double t =
                total_steps > 1 ? static_cast<double>(step) / static_cast<double>(total_steps - 1)
                                : 0.0;
            const double lr_s = cfg.lr_spatial > 0.0 ? lr_at(spatial_sched, t) : 0.0;
            const double lr_f = cfg.lr_freq > 0.0 ? lr_at(freq_sched, t) : 0.0;
            if (base == 0) {
                epoch_lr_spatial = lr_s;
                epoch_lr_freq = lr_f;
            }

            double batch_loss = 0.0;
            for (std::size_t k = 0; k < batch_n; ++k) {
                const ManifestEntry& entry = order[base + k];
                const FrameSequence seq = load_sequence(manifest.entry_dir(entry), cfg.seq_len,
                                                        cfg.image_size, entry.label, entry.id);
                auto fwd = model.full_forward(seq);

                std::vector<TensorT<T>> labels;
                labels.reserve(fwd.depth_maps.size());
                const Tensor label =
                    load_depth_label(manifest, entry, model.config().depth_map_size());
                for (std::size_t i = 0; i < fwd.depth_maps.size(); ++i)
                    labels.push_back(tensor_cast<T>(label));

                const int class_label = entry.label == Label::Spoof ? 1 : 0;
                VarT<T> loss = model.total_loss(fwd.depth_maps, labels, fwd.logits, class_label,
                                                static_cast<T>(cfg.lambda_depth));
                const double loss_value = static_cast<double>(loss->value.data[0]);
                if (!std::isfinite(loss_value))
                    throw NumericError(detail::concat(
                        "train: non-finite loss at step ", step, " (epoch ", epoch,
                        ", lr_spatial=", lr_s, ", lr_freq=", lr_f, ", sequence ", entry.id, ")"));
                batch_loss += loss_value;
                epoch_scores.push_back({entry.id, entry.label,
                                        detail::spoof_probability(fwd.logits)});

                backward(scale(loss, static_cast<T>(1.0 / static_cast<double>(batch_n))));
            }
            batch_loss /= static_cast<double>(batch_n);
            epoch_loss += batch_loss;

            const bool spatial_frozen = lr_s < cfg.freeze_ratio * cfg.lr_spatial;
            if (spatial_frozen)
                sgd_step(spatial_group, 0.0, 0.0);
            else
                sgd_step(spatial_group, lr_s, cfg.wd_spatial);
            sgd_step(freq_group, lr_f, cfg.wd_freq);

            log.steps.push_back({static_cast<int>(step), lr_s, lr_f, batch_loss});
        }

        const auto [a, b] = apcer_bpcer(epoch_scores, 0.5);
        log.epochs.push_back({epoch, epoch_lr_spatial, epoch_lr_freq,
                              epoch_loss / static_cast<double>(steps_per_epoch), acer(a, b)});
    }
    return log;
}

// ---------------------------------------------------------------------------
// evaluation

struct ThresholdPolicy {
    enum class Kind { Fixed, EerOnVal } kind = Kind::Fixed;
    double value = 0.5;

    static ThresholdPolicy fixed(double threshold) { return {Kind::Fixed, threshold}; }
    static ThresholdPolicy eer_on_val() { return {Kind::EerOnVal, 0.0}; }
};

template <typename T>
std::vector<ScoreRecord> score_split(FreqSpatialTempNetT<T>& model,
                                     const DatasetManifest& manifest, const std::string& split) {
    const std::vector<ManifestEntry> entries = manifest.split_entries(split);
    require(!entries.empty(), "score_split: split '", split, "' is empty");
    std::vector<ScoreRecord> scores;
    scores.reserve(entries.size());
    for (const auto& entry : entries) {
        const FrameSequence seq =
            load_sequence(manifest.entry_dir(entry), model.config().seq_len,
                          model.config().image_size, entry.label, entry.id);
        auto fwd = model.full_forward(seq);
        scores.push_back({entry.id, entry.label, detail::spoof_probability(fwd.logits)});
    }
    return scores;
}

template <typename T>
MetricsReport evaluate_split(FreqSpatialTempNetT<T>& model, const DatasetManifest& manifest,
                             const std::string& split, const ThresholdPolicy& policy,
                             std::vector<ScoreRecord>* scores_out = nullptr) {
    double threshold = policy.value;
    if (policy.kind == ThresholdPolicy::Kind::EerOnVal)
        threshold = eer_threshold(score_split(model, manifest, "val")).first;
    std::vector<ScoreRecord> scores = score_split(model, manifest, split);
    const MetricsReport rep = compute_report(scores, threshold);
    if (scores_out) *scores_out = std::move(scores);
    return rep;
}

// ---------------------------------------------------------------------------
// checkpoints

template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const FreqSpatialTempNetT<T>& model) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require_data(std::filesystem::is_directory(dir), "checkpoint: cannot create ", dir.string());
    CheckpointConfig cp;
    for (const auto& [k, v] : model.config_strings()) cp.config[k] = v;
    for (const auto& p : model.parameters()) {
        const std::string file = checkpoint_file_name(p->name);
        save_tensor_fstn(dir / file, tensor_cast<float>(p->value));
        cp.params.emplace_back(p->name, file);
    }
    save_checkpoint_manifest(dir, cp);
}

inline FreqSpatialTempNet load_checkpoint(const std::filesystem::path& dir) {
    const CheckpointConfig cp = load_checkpoint_manifest(dir);
    NetworkConfig cfg;
    try {
        cfg.image_size = std::stoi(cp.config.at("image_size"));
        cfg.seq_len = std::stoi(cp.config.at("seq_len"));
        cfg.width_multiplier = std::stod(cp.config.at("width_multiplier"));
    } catch (const std::exception&) {
        throw DataError("checkpoint: missing or malformed config in " + dir.string());
    }
    FreqSpatialTempNet model(cfg, 0);
    std::map<std::string, Tensor> state;
    for (const auto& [name, file] : cp.params) state[name] = load_tensor_fstn(dir / file);
    model.load_state(state);
    return model;
}

}  // namespace fstnet
