#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "fstnet/fft.hpp"
#include "fstnet/image.hpp"
#include "fstnet/rng.hpp"
#include "fstnet/tensor.hpp"

namespace fstnet {

// DC-centered log-magnitude spectrum, min-max normalized to [0,1].
struct SpectrumImage {
    int h = 0, w = 0;
    std::vector<float> values;
};

namespace detail {

inline std::vector<double> log1p_magnitude(const ComplexSpectrum& s) {
    std::vector<double> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) v[i] = std::log1p(s.magnitude(i));
    return v;
}

}  // namespace detail

inline SpectrumImage to_spectrum_image(const ComplexSpectrum& spectrum) {
    const ComplexSpectrum* src = &spectrum;
    ComplexSpectrum centered;
    if (!spectrum.dc_centered) {
        centered = fftshift(spectrum);
        src = &centered;
    }
    const std::vector<double> lm = detail::log1p_magnitude(*src);
    double lo = lm.empty() ? 0.0 : lm[0], hi = lo;
    for (double v : lm) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    SpectrumImage out;
    out.h = src->h;
    out.w = src->w;
    out.values.resize(lm.size());
    if (hi == lo) {
        // degenerate: all-zero spectrum stays zero, any other flat spectrum
        // normalizes to all ones
        const float v = hi > 0.0 ? 1.0f : 0.0f;
        std::fill(out.values.begin(), out.values.end(), v);
    } else {
        for (std::size_t i = 0; i < lm.size(); ++i)
            out.values[i] = static_cast<float>((lm[i] - lo) / (hi - lo));
    }
    return out;
}

// Spectrum energy outside the DC-centered disk of radius
// radius_fraction * min(h,w)/2. The working definition of "high frequency".
template <typename T>
double high_band_energy(const std::vector<T>& image, int h, int w, double radius_fraction) {
    const ComplexSpectrum s = fft2d(image, h, w);
    const double radius = radius_fraction * (std::min(h, w) / 2.0);
    const double cy = h / 2.0, cx = w / 2.0;
    double energy = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // centered coordinates of the natural-layout bin
            const int yc = (y + h / 2) % h;
            const int xc = (x + w / 2) % w;
            const double d = std::hypot(yc - cy, xc - cx);
            if (d > radius) {
                const std::size_t i = s.at(y, x);
                energy += s.re[i] * s.re[i] + s.im[i] * s.im[i];
            }
        }
    return energy;
}

// Block-aligned replacement mask over a DC-centered spectrum. Selected
// blocks stay clear of the low-frequency disk and come in point-reflected
// pairs so conjugate symmetry survives the replacement.
struct BlockMask {
    int block_size = 0;
    int grid_h = 0, grid_w = 0;  // image extents in pixels
    double low_freq_exclusion_radius = 0.0;
    std::vector<std::pair<int, int>> selected;  // (block row, block col)

    int blocks_y() const { return block_size > 0 ? grid_h / block_size : 0; }
    int blocks_x() const { return block_size > 0 ? grid_w / block_size : 0; }
    std::pair<int, int> mirror(std::pair<int, int> b) const {
        return {blocks_y() - 1 - b.first, blocks_x() - 1 - b.second};
    }
};

namespace detail {

// Distance from the DC bin (h/2, w/2) to the nearest bin of the block.
inline double block_min_distance(int br, int bc, int block, int h, int w) {
    const double cy = h / 2.0, cx = w / 2.0;
    const double y0 = br * block, y1 = br * block + block - 1;
    const double x0 = bc * block, x1 = bc * block + block - 1;
    const double ny = std::min(std::max(cy, y0), y1);
    const double nx = std::min(std::max(cx, x0), x1);
    return std::hypot(ny - cy, nx - cx);
}

// Selected-bin indicator over the centered grid.
inline std::vector<std::uint8_t> mask_bins(const BlockMask& m) {
    std::vector<std::uint8_t> bins(static_cast<std::size_t>(m.grid_h) * m.grid_w, 0);
    for (const auto& [br, bc] : m.selected)
        for (int y = br * m.block_size; y < (br + 1) * m.block_size; ++y)
            for (int x = bc * m.block_size; x < (bc + 1) * m.block_size; ++x)
                bins[static_cast<std::size_t>(y) * m.grid_w + x] = 1;
    return bins;
}

}  // namespace detail

inline BlockMask sample_block_mask(std::uint64_t seed, int h, int w, int block_size,
                                   double replace_fraction, double exclusion_radius) {
    detail::require_pow2_extents(h, w, "sample_block_mask");
    require(block_size >= 1 && h % block_size == 0 && w % block_size == 0,
            "sample_block_mask: block_size ", block_size, " must divide ", h, "x", w);
    require(replace_fraction > 0.0 && replace_fraction <= 1.0,
            "sample_block_mask: replace_fraction must be in (0,1], got ", replace_fraction);
    require(exclusion_radius >= 0.0, "sample_block_mask: exclusion_radius must be >= 0");

    BlockMask mask;
    mask.block_size = block_size;
    mask.grid_h = h;
    mask.grid_w = w;
    mask.low_freq_exclusion_radius = exclusion_radius;

    const double radius = exclusion_radius * (std::min(h, w) / 2.0);
    const int by = mask.blocks_y(), bx = mask.blocks_x();
    std::vector<std::pair<int, int>> eligible;
    for (int br = 0; br < by; ++br)
        for (int bc = 0; bc < bx; ++bc) {
            // a block and its mirror are eligible only together, so the
            // closure below never drags in a low-frequency block
            const auto [mr, mc] = mask.mirror({br, bc});
            if (detail::block_min_distance(br, bc, block_size, h, w) > radius &&
                detail::block_min_distance(mr, mc, block_size, h, w) > radius)
                eligible.emplace_back(br, bc);
        }
    require(!eligible.empty(), "sample_block_mask: exclusion radius ", exclusion_radius,
            " leaves no eligible block at ", h, "x", w, " with block_size ", block_size);

    const auto target = static_cast<std::size_t>(
        std::llround(replace_fraction * static_cast<double>(eligible.size())));
    if (target == 0) return mask;

    Rng rng(seed);
    rng.shuffle(eligible);
    std::vector<std::uint8_t> chosen(static_cast<std::size_t>(by) * bx, 0);
    for (std::size_t i = 0; i < target; ++i) {
        const auto [br, bc] = eligible[i];
        const auto [mr, mc] = mask.mirror({br, bc});
        chosen[static_cast<std::size_t>(br) * bx + bc] = 1;
        chosen[static_cast<std::size_t>(mr) * bx + mc] = 1;
    }
    for (int br = 0; br < by; ++br)
        for (int bc = 0; bc < bx; ++bc)
            if (chosen[static_cast<std::size_t>(br) * bx + bc]) mask.selected.emplace_back(br, bc);
    return mask;
}

namespace detail {

// Core of the synthesis step, one channel at a time. Works on the centered
// spectra; a bin is overwritten only when its conjugate mirror is also
// masked, which keeps the replaced set exactly symmetric and the donor
// coefficients untouched on both sides.
inline std::vector<float> transfer_plane(const std::vector<float>& live,
                                         const std::vector<float>& spoof, int h, int w,
                                         const BlockMask& mask) {
    ComplexSpectrum sl = fftshift(fft2d(live, h, w));
    const ComplexSpectrum ss = fftshift(fft2d(spoof, h, w));

    const std::vector<std::uint8_t> bins = mask_bins(mask);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const std::size_t j = static_cast<std::size_t>((h - y) % h) * w + (w - x) % w;
            if (bins[i] && bins[j]) {
                sl.re[i] = ss.re[i];
                sl.im[i] = ss.im[i];
            }
        }

    // re-enforce conjugate symmetry by averaging mirror pairs (a no-op up to
    // rounding after the symmetric replacement above)
    ComplexSpectrum sym = sl;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const std::size_t j = static_cast<std::size_t>((h - y) % h) * w + (w - x) % w;
            sym.re[i] = 0.5 * (sl.re[i] + sl.re[j]);
            sym.im[i] = 0.5 * (sl.im[i] - sl.im[j]);
        }

    std::vector<float> out = ifft2d(sym);
    for (float& v : out) v = clamp01(v);
    return out;
}

}  // namespace detail

// Transplant the masked spectrum blocks of `spoof` into `live`. Channels are
// processed independently with the same mask; output pixels clamp to [0,1].
inline Image transfer_spoof_pattern(const Image& live, const Image& spoof,
                                    const BlockMask& mask) {
    require(live.h == spoof.h && live.w == spoof.w && live.c == spoof.c,
            "transfer_spoof_pattern: extent mismatch ", live.h, "x", live.w, "x", live.c, " vs ",
            spoof.h, "x", spoof.w, "x", spoof.c);
    require(mask.grid_h == live.h && mask.grid_w == live.w,
            "transfer_spoof_pattern: mask built for ", mask.grid_h, "x", mask.grid_w,
            ", images are ", live.h, "x", live.w);
    Image out(live.h, live.w, live.c);
    for (int ch = 0; ch < live.c; ++ch) {
        const std::vector<float> res =
            detail::transfer_plane(live.plane_copy(ch), spoof.plane_copy(ch), live.h, live.w, mask);
        std::copy(res.begin(), res.end(), out.plane(ch));
    }
    return out;
}

struct SynthesisParams {
    int block_size = 0;              // 0 -> grid/16 (16 px at 256)
    double replace_fraction = 0.3;
    double exclusion_radius = 0.25;  // fraction of half-extent
};

inline int default_block_size(int extent) { return std::max(2, extent / 16); }

// Mask is sampled once on the first frame and reused for the whole clip;
// frame t takes its donor blocks from spoof frame t.
inline FrameSequence synthesize_sequence(const FrameSequence& live, const FrameSequence& spoof,
                                         std::uint64_t seed, const SynthesisParams& params) {
    require(!live.frames.empty(), "synthesize_sequence: empty live sequence");
    require(live.frames.size() == spoof.frames.size(), "synthesize_sequence: length mismatch ",
            live.frames.size(), " vs ", spoof.frames.size());
    const Image& first = live.frames.front();
    for (const Image& f : live.frames)
        require(f.h == first.h && f.w == first.w && f.c == first.c,
                "synthesize_sequence: live frames disagree on extents");
    for (const Image& f : spoof.frames)
        require(f.h == first.h && f.w == first.w && f.c == first.c,
                "synthesize_sequence: spoof frame extent mismatch");

    const int block =
        params.block_size > 0 ? params.block_size : default_block_size(std::min(first.h, first.w));
    const BlockMask mask = sample_block_mask(seed, first.h, first.w, block,
                                             params.replace_fraction, params.exclusion_radius);

    FrameSequence out;
    out.label = Label::Spoof;
    out.id = live.id.empty() ? "synth" : live.id + "_synth";
    out.frames.reserve(live.frames.size());
    for (std::size_t t = 0; t < live.frames.size(); ++t)
        out.frames.push_back(transfer_spoof_pattern(live.frames[t], spoof.frames[t], mask));
    return out;
}

}  // namespace fstnet
