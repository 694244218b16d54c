// fstnet: spoof-data synthesis, spectrum inspection, training and
// presentation-attack metrics in one deterministic binary.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 data error,
// 4 numeric failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fstnet/fstnet.hpp"

namespace fs = std::filesystem;
using namespace fstnet;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Removes declared outputs unless the command commits; keeps failed runs
// from leaving partial files behind.
class OutputGuard {
  public:
    void add_fresh(const fs::path& p) {
        if (!fs::exists(p)) paths_.push_back(p);
    }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    }

  private:
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

int pow2_floor(int n) {
    int p = 1;
    while (p * 2 <= n) p *= 2;
    return p;
}

// Square power-of-two version of an image; size 0 picks the largest extent
// that fits the input.
Image ingest_pow2(const fs::path& path, int size) {
    const Image img = read_png(path);
    int target = size;
    if (target == 0) target = pow2_floor(std::min(img.h, img.w));
    require(is_pow2(target) && target >= 16, "--size must be a power of two >= 16, got ", target);
    return resize_bilinear(img, target, target);
}

Image spectrum_to_gray(const SpectrumImage& si) {
    Image img(si.h, si.w, 1);
    img.data = si.values;
    return img;
}

Image rgb_of(const Image& img) {
    if (img.c == 3) return img;
    Image out(img.h, img.w, 3);
    for (int ch = 0; ch < 3; ++ch)
        std::copy(img.plane(0), img.plane(0) + static_cast<std::size_t>(img.h) * img.w,
                  out.plane(ch));
    return out;
}

struct SynthDataArgs {
    std::string out;
    int live = 0, spoof = 0;
    int val_live = 0, val_spoof = 0;
    int test_live = 0, test_spoof = 0;
    int frames = 10;
    int size = 64;
    double corruption = 0.5;
    double blocks = 0.3;
    int block_size = 0;
};

int cmd_synth_data(const SynthDataArgs& a, std::uint64_t seed) {
    require(a.live >= 1 && a.spoof >= 1,
            "synth-data: need at least one live and one spoof sequence (metrics downstream "
            "require both classes), got --live ",
            a.live, " --spoof ", a.spoof);
    const fs::path root(a.out);
    OutputGuard guard;
    guard.add_fresh(root);

    ToyDatasetParams params;
    params.frames = a.frames;
    params.image_size = a.size;
    params.corruption_strength = a.corruption;
    params.synth.replace_fraction = a.blocks;
    params.synth.block_size = a.block_size;

    std::vector<SplitCounts> splits = {{"train", a.live, a.spoof}};
    if (a.val_live + a.val_spoof > 0) splits.push_back({"val", a.val_live, a.val_spoof});
    if (a.test_live + a.test_spoof > 0) splits.push_back({"test", a.test_live, a.test_spoof});

    const DatasetManifest manifest = generate_toy_dataset(root, splits, params, seed);
    int live = 0, spoof = 0;
    for (const auto& e : manifest.entries) (e.label == Label::Live ? live : spoof)++;
    std::cout << "manifest: " << (root / "manifest.tsv").string() << "\n"
              << "sequences: " << manifest.entries.size() << " (" << live << " live, " << spoof
              << " spoof)\n";
    guard.commit();
    return 0;
}

struct SpectrumArgs {
    std::string in, out_png, out_fstn;
    int size = 0;
};

int cmd_spectrum(const SpectrumArgs& a) {
    require(!a.out_png.empty() || !a.out_fstn.empty(),
            "spectrum: need --out-png and/or --out-fstn");
    OutputGuard guard;
    const Image img = ingest_pow2(a.in, a.size);
    const SpectrumImage si = to_spectrum_image(fft2d(luma(img), img.h, img.w));
    if (!a.out_png.empty()) {
        guard.add_fresh(a.out_png);
        write_png(a.out_png, spectrum_to_gray(si));
        std::cout << "spectrum image: " << a.out_png << "\n";
    }
    if (!a.out_fstn.empty()) {
        guard.add_fresh(a.out_fstn);
        save_tensor_fstn(a.out_fstn, Tensor({si.h, si.w}, si.values));
        std::cout << "spectrum tensor: " << a.out_fstn << "\n";
    }
    guard.commit();
    return 0;
}

struct TransferArgs {
    std::string live, spoof, out, dump_spectra;
    double blocks = 0.3;
    int block_size = 0;
    double exclusion = 0.25;
    int size = 0;
};

int cmd_transfer(const TransferArgs& a, std::uint64_t seed) {
    OutputGuard guard;
    const Image live = rgb_of(ingest_pow2(a.live, a.size));
    const Image spoof_img = resize_bilinear(rgb_of(read_png(a.spoof)), live.h, live.w);

    BlockMask mask;
    if (a.blocks > 0.0) {
        const int block = a.block_size > 0 ? a.block_size : default_block_size(live.h);
        mask = sample_block_mask(seed, live.h, live.w, block, a.blocks, a.exclusion);
    } else {
        mask.block_size = a.block_size > 0 ? a.block_size : default_block_size(live.h);
        mask.grid_h = live.h;
        mask.grid_w = live.w;
        mask.low_freq_exclusion_radius = a.exclusion;
    }

    const Image out = transfer_spoof_pattern(live, spoof_img, mask);
    guard.add_fresh(a.out);
    write_png(a.out, out);
    std::cout << "synthesized: " << a.out << " (" << mask.selected.size()
              << " blocks replaced)\n";

    if (!a.dump_spectra.empty()) {
        const auto dump = [&](const Image& img, const std::string& suffix) {
            const fs::path p = a.dump_spectra + suffix;
            guard.add_fresh(p);
            write_png(p, spectrum_to_gray(to_spectrum_image(fft2d(luma(img), img.h, img.w))));
            std::cout << "spectrum image: " << p.string() << "\n";
        };
        dump(live, "_before.png");
        dump(out, "_after.png");
    }
    guard.commit();
    return 0;
}

struct TrainArgs {
    std::string manifest, out, log_csv;
    std::optional<int> epochs, warmup, batch, frames, size;
    std::optional<double> lr_spatial, lr_freq, wd_spatial, wd_freq, width, lambda;
};

int cmd_train(const TrainArgs& a, std::uint64_t seed, const std::string& config_path) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = load_train_config(config_path);
    cfg.seed = seed;
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.warmup) cfg.warmup_epochs = *a.warmup;
    if (a.batch) cfg.batch_size = *a.batch;
    if (a.frames) cfg.seq_len = *a.frames;
    if (a.size) cfg.image_size = *a.size;
    if (a.lr_spatial) cfg.lr_spatial = *a.lr_spatial;
    if (a.lr_freq) cfg.lr_freq = *a.lr_freq;
    if (a.wd_spatial) cfg.wd_spatial = *a.wd_spatial;
    if (a.wd_freq) cfg.wd_freq = *a.wd_freq;
    if (a.width) cfg.width_multiplier = *a.width;
    if (a.lambda) cfg.lambda_depth = *a.lambda;
    cfg.validate();

    const DatasetManifest manifest = load_manifest(a.manifest);
    FreqSpatialTempNet model(cfg.network(), derive_seed(seed, "model-init"));

    OutputGuard guard;
    const fs::path out(a.out);
    guard.add_fresh(out);
    if (!a.log_csv.empty()) guard.add_fresh(a.log_csv);

    const TrainLog log = train(model, manifest, cfg);
    save_checkpoint(out, model);
    save_train_config(out / "train_config.txt", cfg);
    save_epoch_log_csv(a.log_csv.empty() ? out / "train_log.csv" : fs::path(a.log_csv), log);

    for (const auto& e : log.epochs)
        std::cout << "epoch " << e.epoch << ": lr_spatial=" << e.lr_spatial
                  << " lr_freq=" << e.lr_freq << " loss=" << e.mean_loss
                  << " train_acer=" << e.train_acer << "\n";
    std::cout << "checkpoint: " << out.string() << "\n";
    guard.commit();
    return 0;
}

struct EvalArgs {
    std::string checkpoint, manifest, split = "test";
    std::string policy = "fixed";
    double threshold = 0.5;
    std::string scores, report, roc;
};

int cmd_eval(const EvalArgs& a) {
    require(a.policy == "fixed" || a.policy == "eer-val",
            "eval: --policy must be fixed or eer-val, got ", a.policy);
    FreqSpatialTempNet model = load_checkpoint(a.checkpoint);
    const DatasetManifest manifest = load_manifest(a.manifest);
    const ThresholdPolicy policy = a.policy == "fixed" ? ThresholdPolicy::fixed(a.threshold)
                                                       : ThresholdPolicy::eer_on_val();
    OutputGuard guard;
    std::vector<ScoreRecord> scores;
    const MetricsReport rep = evaluate_split(model, manifest, a.split, policy, &scores);
    if (!a.scores.empty()) {
        guard.add_fresh(a.scores);
        save_scores_csv(a.scores, scores);
    }
    if (!a.report.empty()) {
        guard.add_fresh(a.report);
        save_report(a.report, rep);
    }
    if (!a.roc.empty()) {
        guard.add_fresh(a.roc);
        save_roc_csv(a.roc, scores);
    }
    write_report(std::cout, rep);
    guard.commit();
    return 0;
}

struct MetricsArgs {
    std::string scores;
    std::string policy = "fixed";
    double threshold = 0.5;
    std::string report, roc;
};

int cmd_metrics(const MetricsArgs& a) {
    require(a.policy == "fixed" || a.policy == "eer",
            "metrics: --policy must be fixed or eer, got ", a.policy);
    const std::vector<ScoreRecord> scores = load_scores_csv(a.scores);
    const double threshold = a.policy == "fixed" ? a.threshold : eer_threshold(scores).first;
    const MetricsReport rep = compute_report(scores, threshold);
    OutputGuard guard;
    if (!a.report.empty()) {
        guard.add_fresh(a.report);
        save_report(a.report, rep);
    }
    if (!a.roc.empty()) {
        guard.add_fresh(a.roc);
        save_roc_csv(a.roc, scores);
    }
    write_report(std::cout, rep);
    guard.commit();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-stream frequency/spatial/temporal face anti-spoofing toolkit"};
    app.require_subcommand(1);
    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "master seed; all randomness derives from it")
        ->capture_default_str();
    std::string config_path;
    app.add_option("--config", config_path,
                   "key=value training config file (used by the train subcommand; flags "
                   "override)");

    SynthDataArgs sd;
    auto* synth = app.add_subcommand("synth-data", "generate a deterministic toy dataset");
    synth->add_option("--out", sd.out, "output dataset directory")->required();
    synth->add_option("--live", sd.live, "live training sequences")->required();
    synth->add_option("--spoof", sd.spoof, "spoof training sequences")->required();
    synth->add_option("--val-live", sd.val_live, "live validation sequences");
    synth->add_option("--val-spoof", sd.val_spoof, "spoof validation sequences");
    synth->add_option("--test-live", sd.test_live, "live test sequences");
    synth->add_option("--test-spoof", sd.test_spoof, "spoof test sequences");
    synth->add_option("--frames", sd.frames, "frames per sequence")->capture_default_str();
    synth->add_option("--size", sd.size, "frame extent (power of two)")->capture_default_str();
    synth->add_option("--corruption", sd.corruption, "donor texture amplitude")
        ->capture_default_str();
    synth->add_option("--blocks", sd.blocks, "fraction of eligible spectrum blocks to replace")
        ->capture_default_str();
    synth->add_option("--block-size", sd.block_size, "spectrum block size in px (0 = auto)");

    SpectrumArgs sp;
    auto* spectrum = app.add_subcommand("spectrum", "write the spectrum image of a PNG");
    spectrum->add_option("--in", sp.in, "input PNG")->required();
    spectrum->add_option("--out-png", sp.out_png, "spectrum image PNG (x255)");
    spectrum->add_option("--out-fstn", sp.out_fstn, "spectrum image FSTN tensor");
    spectrum->add_option("--size", sp.size, "resize to this power of two first (0 = auto)");

    TransferArgs tr;
    auto* transfer =
        app.add_subcommand("transfer", "transplant spoof spectrum blocks into a live image");
    transfer->add_option("--live", tr.live, "live input PNG")->required();
    transfer->add_option("--spoof", tr.spoof, "spoof donor PNG")->required();
    transfer->add_option("--out", tr.out, "output PNG")->required();
    transfer->add_option("--blocks", tr.blocks, "fraction of eligible blocks to replace")
        ->capture_default_str();
    transfer->add_option("--block-size", tr.block_size, "block size in px (0 = auto)");
    transfer->add_option("--exclusion", tr.exclusion, "low-frequency exclusion radius fraction")
        ->capture_default_str();
    transfer->add_option("--size", tr.size, "resize both inputs to this power of two (0 = auto)");
    transfer->add_option("--dump-spectra", tr.dump_spectra,
                         "also write <prefix>_before.png / <prefix>_after.png spectrum images");

    TrainArgs ta;
    auto* trn = app.add_subcommand("train", "train on a dataset manifest");
    trn->add_option("--manifest", ta.manifest, "dataset manifest TSV")->required();
    trn->add_option("--out", ta.out, "checkpoint output directory")->required();
    trn->add_option("--log", ta.log_csv, "per-epoch CSV log path (default <out>/train_log.csv)");
    trn->add_option("--epochs", ta.epochs, "training epochs");
    trn->add_option("--warmup", ta.warmup, "warmup epochs for the freq/temporal group");
    trn->add_option("--batch", ta.batch, "sequences per step");
    trn->add_option("--frames", ta.frames, "sequence length");
    trn->add_option("--size", ta.size, "frame extent (power of two)");
    trn->add_option("--lr-spatial", ta.lr_spatial, "spatial base lr (cosine decay)");
    trn->add_option("--lr-freq", ta.lr_freq, "freq/temporal base lr (warmup then hold)");
    trn->add_option("--wd-spatial", ta.wd_spatial, "spatial weight decay");
    trn->add_option("--wd-freq", ta.wd_freq, "freq/temporal weight decay");
    trn->add_option("--width", ta.width, "channel width multiplier in (0,1]");
    trn->add_option("--lambda", ta.lambda, "depth loss weight");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "score a split and report PAD metrics");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint directory")->required();
    eval_cmd->add_option("--manifest", ev.manifest, "dataset manifest TSV")->required();
    eval_cmd->add_option("--split", ev.split, "split to evaluate")->capture_default_str();
    eval_cmd->add_option("--policy", ev.policy, "threshold policy: fixed | eer-val")
        ->capture_default_str();
    eval_cmd->add_option("--threshold", ev.threshold, "decision threshold for --policy fixed")
        ->capture_default_str();
    eval_cmd->add_option("--scores", ev.scores, "write per-sequence scores CSV here");
    eval_cmd->add_option("--report", ev.report, "write the metrics report here");
    eval_cmd->add_option("--roc", ev.roc, "write the ROC sweep CSV here");

    MetricsArgs me;
    auto* metrics_cmd =
        app.add_subcommand("metrics", "recompute a metrics report from a scores CSV");
    metrics_cmd->add_option("--scores", me.scores, "scores CSV (id,label,score)")->required();
    metrics_cmd->add_option("--policy", me.policy, "threshold policy: fixed | eer")
        ->capture_default_str();
    metrics_cmd->add_option("--threshold", me.threshold, "decision threshold for --policy fixed")
        ->capture_default_str();
    metrics_cmd->add_option("--report", me.report, "write the report here");
    metrics_cmd->add_option("--roc", me.roc, "write the ROC sweep CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth_data(sd, seed);
        if (spectrum->parsed()) return cmd_spectrum(sp);
        if (transfer->parsed()) return cmd_transfer(tr, seed);
        if (trn->parsed()) return cmd_train(ta, seed, config_path);
        if (eval_cmd->parsed()) return cmd_eval(ev);
        if (metrics_cmd->parsed()) return cmd_metrics(me);
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
