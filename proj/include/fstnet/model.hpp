#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fstnet/fft.hpp"
#include "fstnet/image.hpp"
#include "fstnet/ops.hpp"
#include "fstnet/optim.hpp"
#include "fstnet/spectrum.hpp"
#include "fstnet/tensor.hpp"

namespace fstnet {

struct NetworkConfig {
    int image_size = 256;
    int seq_len = 10;
    double width_multiplier = 1.0;

    int scaled(int base) const {
        const int c = static_cast<int>(std::llround(base * width_multiplier));
        return c < 1 ? 1 : c;
    }
    int stage_channels(int stage) const {  // stage 0..3
        static constexpr int base[4] = {64, 128, 256, 512};
        return scaled(base[stage]);
    }
    int freq_channels() const { return scaled(64); }
    int temporal_channels() const { return scaled(64); }
    int feature_dim() const { return scaled(512); }
    int depth_map_size() const { return image_size / 8; }
    int fused_map_size() const { return image_size / 16; }

    void validate() const {
        require(is_pow2(image_size) && image_size >= 16,
                "NetworkConfig: image_size must be a power of two >= 16, got ", image_size);
        require(seq_len >= 1, "NetworkConfig: seq_len must be >= 1, got ", seq_len);
        require(width_multiplier > 0.0 && width_multiplier <= 1.0,
                "NetworkConfig: width_multiplier must be in (0,1], got ", width_multiplier);
    }
};

// [1, 6, H, W] tensor: RGB planes then HSV planes of one frame.
template <typename T = float>
TensorT<T> rgbhsv_tensor(const Image& frame) {
    require(frame.c == 3, "rgbhsv_tensor: expected RGB frame, got ", frame.c, " channels");
    const Image hsv = rgb_to_hsv(frame);
    TensorT<T> t({1, 6, frame.h, frame.w});
    const std::size_t hw = static_cast<std::size_t>(frame.h) * frame.w;
    for (std::size_t i = 0; i < 3 * hw; ++i) t.data[i] = static_cast<T>(frame.data[i]);
    for (std::size_t i = 0; i < 3 * hw; ++i) t.data[3 * hw + i] = static_cast<T>(hsv.data[i]);
    return t;
}

// [1, N, H, W] stack of per-frame spectrum images (luma -> DFT -> DC-centered
// normalized log magnitude).
template <typename T = float>
TensorT<T> sequence_spectra_tensor(const FrameSequence& seq) {
    require(!seq.frames.empty(), "sequence_spectra_tensor: empty sequence");
    const int h = seq.frames[0].h, w = seq.frames[0].w;
    TensorT<T> t({1, static_cast<int>(seq.frames.size()), h, w});
    const std::size_t hw = static_cast<std::size_t>(h) * w;
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        const SpectrumImage si = to_spectrum_image(fft2d(luma(seq.frames[f]), h, w));
        for (std::size_t i = 0; i < hw; ++i) t.data[f * hw + i] = static_cast<T>(si.values[i]);
    }
    return t;
}

// (layer name, output dims) pairs recorded by trace_shapes().
using ShapeTrace = std::vector<std::pair<std::string, std::vector<int>>>;

// Two-stream spoof detector: a residual depth-regression backbone over
// RGB+HSV frames, a shallow spectrum stream over the frame stack, a 1x1
// temporal conv over the estimated depth maps, and a fused linear classifier.
template <typename T>
class FreqSpatialTempNetT {
  public:
    struct Forward {
        std::vector<VarT<T>> depth_maps;  // seq_len maps, each [1,1,S/8,S/8]
        VarT<T> feature;                  // [1, feature_dim]
        VarT<T> logits;                   // [1, 2]
    };

    FreqSpatialTempNetT(NetworkConfig cfg, std::uint64_t seed) : cfg_(cfg) {
        cfg_.validate();
        const int c0 = cfg_.stage_channels(0);
        conv0_ = add_param({c0, 6, 3, 3}, "spatial.conv0_0.weight", seed);
        int in_ch = c0;
        for (int s = 0; s < 4; ++s) {
            const int out_ch = cfg_.stage_channels(s);
            for (int b = 0; b < 2; ++b) {
                Block& blk = stages_[s][b];
                // the single in-stage downsample sits on the last block of
                // stage 2, realizing the 64 -> 32 transition
                blk.stride = (s == 1 && b == 1) ? 2 : 1;
                const std::string prefix =
                    "spatial.stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1);
                blk.conv1 = add_param({out_ch, in_ch, 3, 3}, prefix + ".conv1.weight", seed);
                blk.conv2 = add_param({out_ch, out_ch, 3, 3}, prefix + ".conv2.weight", seed);
                if (in_ch != out_ch || blk.stride != 1)
                    blk.proj = add_param({out_ch, in_ch, 1, 1}, prefix + ".proj.weight", seed);
                in_ch = out_ch;
            }
        }
        head_ = add_param({1, cfg_.stage_channels(3), 1, 1}, "spatial.head.weight", seed);

        const int n = cfg_.seq_len;
        freq_dw_ = add_param({n, 1, 5, 5}, "freq.depthwise.weight", seed);
        freq_pw_ = add_param({cfg_.freq_channels(), n, 1, 1}, "freq.pointwise.weight", seed);
        temp_conv_ =
            add_param({cfg_.temporal_channels(), n, 1, 1}, "temporal.conv0.weight", seed);

        const int m = cfg_.fused_map_size();
        const int fused = (cfg_.freq_channels() + cfg_.temporal_channels()) * m * m;
        fc1_w_ = add_param({fused, cfg_.feature_dim()}, "fusion.fc1.weight", seed);
        fc1_b_ = add_param({cfg_.feature_dim()}, "fusion.fc1.bias", seed);
        fc2_w_ = add_param({cfg_.feature_dim(), 2}, "fusion.fc2.weight", seed);
        fc2_b_ = add_param({2}, "fusion.fc2.bias", seed);
    }

    // One frame as [1,6,S,S] -> depth map [1,1,S/8,S/8] in (0,1).
    VarT<T> spatial_forward(const VarT<T>& rgbhsv, ShapeTrace* trace = nullptr) {
        const auto& d = rgbhsv->value.dims;
        require(d.size() == 4 && d[0] == 1 && d[1] == 6,
                "spatial_forward: input must be [1,6,H,W], got ", shape_str(d));
        require(d[2] == cfg_.image_size && d[3] == cfg_.image_size,
                "spatial_forward: expected ", cfg_.image_size, "x", cfg_.image_size, ", got ",
                shape_str(d));
        VarT<T> x = relu(conv2d(rgbhsv, conv0_, 2, 1));
        record(trace, "spatial.conv0_0", x);
        x = maxpool2d(x, 2, 2);
        record(trace, "spatial.maxpool1", x);
        for (int s = 0; s < 4; ++s) {
            for (const auto& blk : stages_[s]) x = residual_block(x, blk);
            record(trace, "spatial.stage" + std::to_string(s + 1), x);
        }
        x = sigmoid(pointwise_conv2d(x, head_));
        record(trace, "spatial.head", x);
        return x;
    }

    // Spectrum stack [1,N,S,S] -> MultiFreqMap [1,Cf,S/16,S/16].
    VarT<T> freqtemp_forward(const VarT<T>& spectra, ShapeTrace* trace = nullptr) {
        const auto& d = spectra->value.dims;
        require(d.size() == 4 && d[0] == 1 && d[1] == cfg_.seq_len,
                "freqtemp_forward: input must be [1,", cfg_.seq_len, ",H,W], got ", shape_str(d));
        require(d[2] % 16 == 0 && d[3] % 16 == 0,
                "freqtemp_forward: extents must be divisible by 16, got ", shape_str(d));
        VarT<T> x = instance_norm(spectra);
        record(trace, "freq.instance_norm", x);
        x = depthwise_conv2d(x, freq_dw_, 1, 2);
        record(trace, "freq.depthwise", x);
        x = maxpool2d(x, 8, 8);
        record(trace, "freq.maxpool2", x);
        x = pointwise_conv2d(x, freq_pw_);
        record(trace, "freq.pointwise", x);
        x = layer_norm(x);
        record(trace, "freq.layer_norm", x);
        x = maxpool2d(x, 2, 2);
        record(trace, "freq.maxpool3", x);
        return x;
    }

    // Depth-map stack [1,N,S/8,S/8] -> MultiSpatialMap [1,Ct,S/16,S/16].
    VarT<T> temporal_forward(const VarT<T>& depth_stack, ShapeTrace* trace = nullptr) {
        const auto& d = depth_stack->value.dims;
        require(d.size() == 4 && d[0] == 1 && d[1] == cfg_.seq_len,
                "temporal_forward: input must be [1,", cfg_.seq_len, ",H,W], got ", shape_str(d));
        VarT<T> x = relu(pointwise_conv2d(depth_stack, temp_conv_));
        record(trace, "temporal.conv0", x);
        x = maxpool2d(x, 2, 2);
        record(trace, "temporal.maxpool4", x);
        return x;
    }

    // (feature [1,F], logits [1,2]) from the two fused-scale maps.
    std::pair<VarT<T>, VarT<T>> fuse_and_classify(const VarT<T>& spatial_map,
                                                  const VarT<T>& freq_map,
                                                  ShapeTrace* trace = nullptr) {
        const auto& sd = spatial_map->value.dims;
        const auto& fd = freq_map->value.dims;
        require(sd.size() == 4 && fd.size() == 4 && sd[2] == fd[2] && sd[3] == fd[3],
                "fuse_and_classify: map extents disagree: ", shape_str(sd), " vs ",
                shape_str(fd));
        VarT<T> flat = concat_channels<T>(
            {reshape(spatial_map, {1, sd[1] * sd[2] * sd[3], 1, 1}),
             reshape(freq_map, {1, fd[1] * fd[2] * fd[3], 1, 1})});
        flat = reshape(flat, {1, flat->value.dims[1]});
        VarT<T> feature = fully_connected(flat, fc1_w_, fc1_b_);
        record(trace, "fusion.feature", feature);
        VarT<T> logits = fully_connected(feature, fc2_w_, fc2_b_);
        record(trace, "fusion.logits", logits);
        return {feature, logits};
    }

    Forward full_forward(const FrameSequence& seq, ShapeTrace* trace = nullptr) {
        require(static_cast<int>(seq.frames.size()) == cfg_.seq_len, "full_forward: sequence of ",
                seq.frames.size(), " frames, model expects ", cfg_.seq_len);
        for (const Image& f : seq.frames)
            require(f.h == cfg_.image_size && f.w == cfg_.image_size && f.c == 3,
                    "full_forward: frames must be RGB ", cfg_.image_size, "x", cfg_.image_size);

        Forward out;
        out.depth_maps.reserve(seq.frames.size());
        for (std::size_t i = 0; i < seq.frames.size(); ++i)
            out.depth_maps.push_back(spatial_forward(make_var(rgbhsv_tensor<T>(seq.frames[i])),
                                                     i == 0 ? trace : nullptr));
        const VarT<T> depth_stack =
            reshape(concat_channels(out.depth_maps),
                    {1, cfg_.seq_len, cfg_.depth_map_size(), cfg_.depth_map_size()});
        const VarT<T> spatial_map = temporal_forward(depth_stack, trace);
        const VarT<T> freq_map =
            freqtemp_forward(make_var(sequence_spectra_tensor<T>(seq)), trace);
        auto [feature, logits] = fuse_and_classify(spatial_map, freq_map, trace);
        out.feature = feature;
        out.logits = logits;
        return out;
    }

    // Stage-by-stage output dims on a zero input; for conformance checks.
    ShapeTrace trace_shapes() {
        FrameSequence zeros;
        zeros.frames.assign(static_cast<std::size_t>(cfg_.seq_len),
                            Image(cfg_.image_size, cfg_.image_size, 3));
        ShapeTrace trace;
        full_forward(zeros, &trace);
        return trace;
    }

    // lambda * mean_over_frames(l2(map, label)) + softmax CE.
    VarT<T> total_loss(const std::vector<VarT<T>>& depth_maps,
                       const std::vector<TensorT<T>>& depth_labels, const VarT<T>& logits,
                       int class_label, T lambda_depth) {
        require(!depth_maps.empty(), "total_loss: no depth maps");
        require(depth_maps.size() == depth_labels.size(), "total_loss: ", depth_maps.size(),
                " maps but ", depth_labels.size(), " labels");
        for (std::size_t i = 0; i < depth_maps.size(); ++i)
            require(depth_maps[i]->value.numel() == depth_labels[i].numel(),
                    "total_loss: map ", i, " is ", depth_maps[i]->value.shape(), ", label is ",
                    depth_labels[i].shape());
        auto per_frame = [&](std::size_t i) {
            return l2_loss(reshape(depth_maps[i], depth_labels[i].dims), depth_labels[i]);
        };
        VarT<T> depth = per_frame(0);
        for (std::size_t i = 1; i < depth_maps.size(); ++i) depth = add(depth, per_frame(i));
        depth = scale(depth, static_cast<T>(lambda_depth / static_cast<double>(depth_maps.size())));
        return add(depth, softmax_cross_entropy(logits, {class_label}));
    }

    const std::vector<VarT<T>>& parameters() const { return params_; }
    const NetworkConfig& config() const { return cfg_; }

    std::map<std::string, std::string> config_strings() const {
        std::ostringstream wm;
        wm << cfg_.width_multiplier;
        return {{"image_size", std::to_string(cfg_.image_size)},
                {"seq_len", std::to_string(cfg_.seq_len)},
                {"width_multiplier", wm.str()}};
    }

    void load_state(const std::map<std::string, Tensor>& state) {
        require_data(state.size() == params_.size(), "load_state: checkpoint has ", state.size(),
                     " tensors, model has ", params_.size());
        for (const auto& p : params_) {
            const auto it = state.find(p->name);
            require_data(it != state.end(), "load_state: missing parameter ", p->name);
            require_data(it->second.dims == p->value.dims, "load_state: ", p->name, " is ",
                         p->value.shape(), " in the model but ", it->second.shape(),
                         " in the checkpoint");
            for (std::size_t i = 0; i < p->value.numel(); ++i)
                p->value.data[i] = static_cast<T>(it->second.data[i]);
            p->zero_grad();
        }
    }

  private:
    struct Block {
        VarT<T> conv1, conv2, proj;  // proj null for identity shortcuts
        int stride = 1;
    };

    static void record(ShapeTrace* trace, const std::string& name, const VarT<T>& v) {
        if (trace) trace->emplace_back(name, v->value.dims);
    }

    VarT<T> add_param(std::vector<int> dims, const std::string& name, std::uint64_t seed) {
        auto p = make_param(init_normal<T>(std::move(dims), 0.0, 0.02, derive_seed(seed, name)),
                            name);
        params_.push_back(p);
        return p;
    }

    VarT<T> residual_block(const VarT<T>& x, const Block& blk) {
        VarT<T> y = relu(conv2d(x, blk.conv1, 1, 1));
        y = conv2d(y, blk.conv2, blk.stride, 1);
        VarT<T> shortcut = x;
        if (blk.proj) {
            shortcut = blk.stride == 1 ? pointwise_conv2d(x, blk.proj)
                                       : conv2d(x, blk.proj, blk.stride, 0);
        }
        return relu(add(y, shortcut));
    }

    NetworkConfig cfg_;
    std::vector<VarT<T>> params_;
    VarT<T> conv0_;
    std::array<std::array<Block, 2>, 4> stages_;
    VarT<T> head_;
    VarT<T> freq_dw_, freq_pw_;
    VarT<T> temp_conv_;
    VarT<T> fc1_w_, fc1_b_, fc2_w_, fc2_b_;
};

using FreqSpatialTempNet = FreqSpatialTempNetT<float>;

}  // namespace fstnet
