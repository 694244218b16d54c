#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "fstnet/check.hpp"
#include "fstnet/image.hpp"
#include "fstnet/png_io.hpp"
#include "fstnet/rng.hpp"
#include "fstnet/serialize.hpp"
#include "fstnet/spectrum.hpp"
#include "fstnet/tensor.hpp"

namespace fstnet {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// manifest

struct ManifestEntry {
    std::string dir;  // relative to the manifest root
    Label label = Label::Live;
    std::string id;
    std::string split;  // train | val | test
};

struct DatasetManifest {
    fs::path root;
    std::vector<ManifestEntry> entries;

    std::vector<ManifestEntry> split_entries(const std::string& split) const {
        std::vector<ManifestEntry> out;
        for (const auto& e : entries)
            if (e.split == split) out.push_back(e);
        return out;
    }
    fs::path entry_dir(const ManifestEntry& e) const { return root / e.dir; }

    void validate() const {
        std::set<std::pair<std::string, std::string>> seen;  // id -> split
        std::set<std::string> split_of_id;
        for (const auto& e : entries) {
            require_data(!e.id.empty(), "manifest: empty sequence id");
            const bool fresh = seen.insert({e.id, e.split}).second;
            require_data(fresh, "manifest: duplicate entry for id ", e.id, " in split ", e.split);
            const bool new_id = split_of_id.insert(e.id).second;
            require_data(new_id, "manifest: id ", e.id, " appears in more than one split");
        }
    }
};

inline void save_manifest(const fs::path& path, const DatasetManifest& m) {
    std::ofstream os(path, std::ios::trunc);
    require_data(os.good(), "manifest: cannot write ", path.string());
    for (const auto& e : m.entries)
        os << e.dir << "\t" << label_name(e.label) << "\t" << e.id << "\t" << e.split << "\n";
    require_data(os.good(), "manifest: write failed for ", path.string());
}

inline DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream is(path);
    require_data(is.good(), "manifest: cannot open ", path.string());
    DatasetManifest m;
    m.root = path.parent_path();
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                cols.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        require_data(cols.size() == 4, "manifest: expected 4 tab-separated columns, got ",
                     cols.size(), " in line '", line, "'");
        m.entries.push_back({cols[0], parse_label(cols[1]), cols[2], cols[3]});
    }
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// sequence ingestion

inline std::string frame_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04d.png", index);
    return buf;
}

// First N frames of a sequence directory, resized and scaled to [0,1].
inline FrameSequence load_sequence(const fs::path& dir, int n_frames, int image_size,
                                   Label label = Label::Live, const std::string& id = "") {
    require(n_frames >= 1, "load_sequence: need at least one frame, got ", n_frames);
    FrameSequence seq;
    seq.label = label;
    seq.id = id.empty() ? dir.filename().string() : id;
    seq.frames.reserve(static_cast<std::size_t>(n_frames));
    for (int i = 0; i < n_frames; ++i) {
        const fs::path frame = dir / frame_file_name(i);
        require_data(fs::exists(frame), "load_sequence: missing frame ", frame.string());
        Image img = read_png(frame);
        require_data(img.c == 3 || img.c == 1, "load_sequence: unsupported channel count in ",
                     frame.string());
        if (img.c == 1) {  // promote grayscale to RGB
            Image rgb(img.h, img.w, 3);
            for (int ch = 0; ch < 3; ++ch)
                std::copy(img.plane(0), img.plane(0) + static_cast<std::size_t>(img.h) * img.w,
                          rgb.plane(ch));
            img = std::move(rgb);
        }
        seq.frames.push_back(resize_bilinear(img, image_size, image_size));
    }
    return seq;
}

// ---------------------------------------------------------------------------
// depth labels

struct DepthLabel {
    int size = 0;
    std::vector<float> map;  // size x size, values in [0,1]
    bool is_live = false;
};

// Procedural live label: a smooth radial bump, peak near the center, min-max
// normalized so the map spans [0,1] exactly.
inline DepthLabel make_live_depth_label(std::uint64_t seed, int size = 32) {
    require(size >= 2, "make_live_depth_label: size must be >= 2, got ", size);
    Rng rng(seed);
    const double cy = (size - 1) / 2.0 + rng.uniform(-0.08, 0.08) * size;
    const double cx = (size - 1) / 2.0 + rng.uniform(-0.08, 0.08) * size;
    const double sy = size * rng.uniform(0.30, 0.40);
    const double sx = size * rng.uniform(0.26, 0.36);

    std::vector<double> raw(static_cast<std::size_t>(size) * size);
    double lo = 1e30, hi = -1e30;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double dy = (y - cy) / sy;
            const double dx = (x - cx) / sx;
            const double v = std::exp(-0.5 * (dy * dy + dx * dx));
            raw[static_cast<std::size_t>(y) * size + x] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    DepthLabel label;
    label.size = size;
    label.is_live = true;
    label.map.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        label.map[i] = static_cast<float>((raw[i] - lo) / (hi - lo));
    return label;
}

inline DepthLabel make_spoof_depth_label(int size = 32) {
    require(size >= 1, "make_spoof_depth_label: bad size ", size);
    DepthLabel label;
    label.size = size;
    label.is_live = false;
    label.map.assign(static_cast<std::size_t>(size) * size, 0.0f);
    return label;
}

inline Tensor depth_label_tensor(const DepthLabel& label) {
    return Tensor({label.size, label.size},
                  std::vector<float>(label.map.begin(), label.map.end()));
}

inline const char* depth_label_file_name() { return "depth_label.fstn"; }

// Depth label for a manifest entry at the requested map size. Prefers the
// cached FSTN written at generation time; falls back to the id-derived
// procedural label, which matches the generator's output by construction.
inline Tensor load_depth_label(const DatasetManifest& manifest, const ManifestEntry& entry,
                               int map_size) {
    if (entry.label == Label::Spoof)
        return Tensor({map_size, map_size});
    const fs::path cached = manifest.entry_dir(entry) / depth_label_file_name();
    Tensor t;
    if (fs::exists(cached)) {
        t = load_tensor_fstn(cached);
        require_data(t.rank() == 2 && t.dim(0) == t.dim(1), "depth label ", cached.string(),
                     " must be a square rank-2 tensor, got ", t.shape());
    } else {
        t = depth_label_tensor(make_live_depth_label(derive_seed(0, entry.id)));
    }
    if (t.dim(0) == map_size) return t;
    Image img(t.dim(0), t.dim(1), 1);
    img.data = t.data;
    const Image resized = resize_bilinear(img, map_size, map_size);
    return Tensor({map_size, map_size}, resized.data);
}

// ---------------------------------------------------------------------------
// procedural toy dataset

struct ToyDatasetParams {
    int frames = 10;
    int image_size = 64;
    double corruption_strength = 0.5;  // donor texture amplitude
    SynthesisParams synth;
};

namespace detail {

// Smooth "face": a skin-toned elliptical blob with two darker eye spots over
// a soft background gradient, drifting a fraction of a pixel per frame.
inline std::vector<Image> toy_live_frames(Rng& rng, int n_frames, int size) {
    const double base_r = rng.uniform(0.65, 0.85);
    const double base_g = base_r * rng.uniform(0.75, 0.9);
    const double base_b = base_g * rng.uniform(0.75, 0.9);
    const double bg = rng.uniform(0.15, 0.35);
    double cy = size * rng.uniform(0.45, 0.55);
    double cx = size * rng.uniform(0.45, 0.55);
    const double vy = rng.uniform(-0.4, 0.4);
    const double vx = rng.uniform(-0.4, 0.4);
    const double ry = size * rng.uniform(0.26, 0.33);
    const double rx = size * rng.uniform(0.20, 0.27);
    const double eye_dx = rx * 0.45, eye_dy = -ry * 0.25, eye_r = size * 0.05;

    std::vector<Image> frames;
    frames.reserve(static_cast<std::size_t>(n_frames));
    for (int t = 0; t < n_frames; ++t) {
        Image img(size, size, 3);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double grad = bg + 0.1 * (static_cast<double>(y) / size);
                const double dy = (y - cy) / ry;
                const double dx = (x - cx) / rx;
                const double face = std::exp(-0.5 * (dy * dy + dx * dx));
                double eyes = 0.0;
                for (int e = -1; e <= 1; e += 2) {
                    const double ey = (y - (cy + eye_dy)) / eye_r;
                    const double ex = (x - (cx + e * eye_dx)) / eye_r;
                    eyes += std::exp(-0.5 * (ey * ey + ex * ex));
                }
                const double lum = grad * (1.0 - face) + face * (1.0 - 0.35 * eyes);
                img.at(0, y, x) = clamp01(static_cast<float>(lum * base_r));
                img.at(1, y, x) = clamp01(static_cast<float>(lum * base_g));
                img.at(2, y, x) = clamp01(static_cast<float>(lum * base_b));
            }
        frames.push_back(std::move(img));
        cy += vy;
        cx += vx;
    }
    return frames;
}

// Donor texture: broadband pixel noise with checkerboard and diagonal
// interference accents, phases drifting per frame, riding on mid gray. The
// noise keeps the donor spectrum bright across the whole plane, so every
// transplanted block carries a visible cue no matter where the mask lands.
inline std::vector<Image> toy_donor_frames(Rng& rng, int n_frames, int size, double strength) {
    const int period = rng.uniform() < 0.5 ? 2 : 4;
    const double f1 = 2.0 * std::numbers::pi / period;
    const double f2 = 2.0 * std::numbers::pi / (period * 2);
    double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double dphase = rng.uniform(0.1, 0.4);

    std::vector<Image> frames;
    frames.reserve(static_cast<std::size_t>(n_frames));
    for (int t = 0; t < n_frames; ++t) {
        Image img(size, size, 3);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double checker = std::cos(f1 * x + phase) * std::cos(f1 * y);
                const double moire = std::sin(f2 * (x + y) + 0.5 * phase);
                const double noise = rng.uniform(-1.0, 1.0);
                const double v =
                    0.5 + 0.5 * strength * (0.4 * checker + 0.2 * moire + 0.7 * noise);
                for (int ch = 0; ch < 3; ++ch)
                    img.at(ch, y, x) = clamp01(static_cast<float>(v * (1.0 - 0.05 * ch)));
            }
        frames.push_back(std::move(img));
        phase += dphase;
    }
    return frames;
}

inline void write_sequence(const fs::path& dir, const std::vector<Image>& frames) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < frames.size(); ++i)
        write_png(dir / frame_file_name(static_cast<int>(i)), frames[i]);
}

}  // namespace detail

struct SplitCounts {
    std::string split;
    int live = 0;
    int spoof = 0;
};

// Deterministic desk-scale dataset: live sequences are drifting procedural
// faces; spoof sequences are live-style bases corrupted by the spectral
// block transfer against a high-frequency donor. One sub-seed per sequence
// (master ^ index), so generation order never changes the content.
inline DatasetManifest generate_toy_dataset(const fs::path& root,
                                            const std::vector<SplitCounts>& splits,
                                            const ToyDatasetParams& params, std::uint64_t seed) {
    require(params.frames >= 1, "generate_toy_dataset: frames must be >= 1");
    require(is_pow2(params.image_size) && params.image_size >= 16,
            "generate_toy_dataset: image_size must be a power of two >= 16, got ",
            params.image_size);
    for (const auto& s : splits)
        require(s.live >= 0 && s.spoof >= 0, "generate_toy_dataset: negative count for split ",
                s.split);

    std::error_code ec;
    fs::create_directories(root, ec);
    require_data(!ec && fs::is_directory(root), "generate_toy_dataset: cannot create ",
                 root.string());

    DatasetManifest manifest;
    manifest.root = root;
    std::uint64_t index = 0;
    char id_buf[64];

    for (const auto& split : splits) {
        for (int i = 0; i < split.live + split.spoof; ++i, ++index) {
            const bool live = i < split.live;
            std::snprintf(id_buf, sizeof(id_buf), "%s_%s_%04d", split.split.c_str(),
                          live ? "live" : "spoof", live ? i : i - split.live);
            const std::string id = id_buf;
            const std::uint64_t seq_seed = seed ^ index;
            Rng rng(derive_seed(seq_seed, live ? "live" : "spoof-base"));

            std::vector<Image> frames =
                detail::toy_live_frames(rng, params.frames, params.image_size);
            if (!live) {
                Rng donor_rng(derive_seed(seq_seed, "donor"));
                const std::vector<Image> donors = detail::toy_donor_frames(
                    donor_rng, params.frames, params.image_size, params.corruption_strength);
                FrameSequence base;
                base.frames = std::move(frames);
                base.id = id;
                FrameSequence donor;
                donor.frames = donors;
                donor.label = Label::Spoof;
                const FrameSequence synth = synthesize_sequence(
                    base, donor, derive_seed(seq_seed, "mask"), params.synth);
                frames = synth.frames;
            }

            detail::write_sequence(root / id, frames);
            const DepthLabel label = live ? make_live_depth_label(derive_seed(0, id))
                                          : make_spoof_depth_label();
            save_tensor_fstn(root / id / depth_label_file_name(), depth_label_tensor(label));
            manifest.entries.push_back({id, live ? Label::Live : Label::Spoof, id, split.split});
        }
    }

    manifest.validate();
    save_manifest(root / "manifest.tsv", manifest);
    return manifest;
}

}  // namespace fstnet
