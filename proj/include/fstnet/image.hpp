#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fstnet/check.hpp"
#include "fstnet/tensor.hpp"

namespace fstnet {

// Planar (channel-major) float image, values in [0,1]. c is 1 or 3.
struct Image {
    int h = 0, w = 0, c = 0;
    std::vector<float> data;

    Image() = default;
    Image(int height, int width, int channels, float fill = 0.0f)
        : h(height), w(width), c(channels),
          data(static_cast<std::size_t>(height) * width * channels, fill) {}

    float& at(int ch, int y, int x) {
        return data[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    float at(int ch, int y, int x) const {
        return data[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    const float* plane(int ch) const { return data.data() + static_cast<std::size_t>(ch) * h * w; }
    float* plane(int ch) { return data.data() + static_cast<std::size_t>(ch) * h * w; }
    std::vector<float> plane_copy(int ch) const {
        return {plane(ch), plane(ch) + static_cast<std::size_t>(h) * w};
    }
};

enum class Label { Live, Spoof };

inline const char* label_name(Label l) { return l == Label::Live ? "live" : "spoof"; }
inline Label parse_label(const std::string& s) {
    require_data(s == "live" || s == "spoof", "unknown label '", s, "' (expected live|spoof)");
    return s == "live" ? Label::Live : Label::Spoof;
}

// N consecutive frames of one clip plus its class label.
struct FrameSequence {
    std::vector<Image> frames;
    Label label = Label::Live;
    std::string id;
};

inline float clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }

// Hexcone RGB -> HSV with every channel scaled to [0,1]; achromatic pixels
// get H = 0, S = 0.
inline void rgb_to_hsv_pixel(float r, float g, float b, float& h, float& s, float& v) {
    const float maxc = std::max({r, g, b});
    const float minc = std::min({r, g, b});
    const float d = maxc - minc;
    v = maxc;
    s = maxc > 0.0f ? d / maxc : 0.0f;
    if (d <= 0.0f) {
        h = 0.0f;
        return;
    }
    float hue;
    if (maxc == r)
        hue = (g - b) / d;
    else if (maxc == g)
        hue = 2.0f + (b - r) / d;
    else
        hue = 4.0f + (r - g) / d;
    hue /= 6.0f;
    if (hue < 0.0f) hue += 1.0f;
    h = hue;
}

inline void hsv_to_rgb_pixel(float h, float s, float v, float& r, float& g, float& b) {
    if (s <= 0.0f) {
        r = g = b = v;
        return;
    }
    const float hh = (h - std::floor(h)) * 6.0f;
    const int sector = std::min(5, static_cast<int>(hh));
    const float f = hh - static_cast<float>(sector);
    const float p = v * (1.0f - s);
    const float q = v * (1.0f - s * f);
    const float t = v * (1.0f - s * (1.0f - f));
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
}

inline Image rgb_to_hsv(const Image& rgb) {
    require(rgb.c == 3, "rgb_to_hsv: expected 3 channels, got ", rgb.c);
    Image out(rgb.h, rgb.w, 3);
    const std::size_t hw = static_cast<std::size_t>(rgb.h) * rgb.w;
    for (std::size_t i = 0; i < hw; ++i)
        rgb_to_hsv_pixel(rgb.data[i], rgb.data[hw + i], rgb.data[2 * hw + i], out.data[i],
                         out.data[hw + i], out.data[2 * hw + i]);
    return out;
}

inline Image hsv_to_rgb(const Image& hsv) {
    require(hsv.c == 3, "hsv_to_rgb: expected 3 channels, got ", hsv.c);
    Image out(hsv.h, hsv.w, 3);
    const std::size_t hw = static_cast<std::size_t>(hsv.h) * hsv.w;
    for (std::size_t i = 0; i < hw; ++i)
        hsv_to_rgb_pixel(hsv.data[i], hsv.data[hw + i], hsv.data[2 * hw + i], out.data[i],
                         out.data[hw + i], out.data[2 * hw + i]);
    return out;
}

inline std::vector<float> luma(const Image& img) {
    if (img.c == 1) return img.plane_copy(0);
    require(img.c == 3, "luma: expected 1 or 3 channels, got ", img.c);
    const std::size_t hw = static_cast<std::size_t>(img.h) * img.w;
    std::vector<float> out(hw);
    for (std::size_t i = 0; i < hw; ++i)
        out[i] = 0.299f * img.data[i] + 0.587f * img.data[hw + i] + 0.114f * img.data[2 * hw + i];
    return out;
}

// Bilinear resample with pixel-center alignment.
inline Image resize_bilinear(const Image& src, int out_h, int out_w) {
    require(out_h >= 1 && out_w >= 1, "resize_bilinear: bad target ", out_h, "x", out_w);
    if (src.h == out_h && src.w == out_w) return src;
    Image out(out_h, out_w, src.c);
    const float sy = static_cast<float>(src.h) / static_cast<float>(out_h);
    const float sx = static_cast<float>(src.w) / static_cast<float>(out_w);
    for (int ch = 0; ch < src.c; ++ch)
        for (int y = 0; y < out_h; ++y) {
            float fy = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
            fy = std::min(std::max(fy, 0.0f), static_cast<float>(src.h - 1));
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, src.h - 1);
            const float wy = fy - static_cast<float>(y0);
            for (int x = 0; x < out_w; ++x) {
                float fx = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
                fx = std::min(std::max(fx, 0.0f), static_cast<float>(src.w - 1));
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, src.w - 1);
                const float wx = fx - static_cast<float>(x0);
                const float top = src.at(ch, y0, x0) * (1.0f - wx) + src.at(ch, y0, x1) * wx;
                const float bot = src.at(ch, y1, x0) * (1.0f - wx) + src.at(ch, y1, x1) * wx;
                out.at(ch, y, x) = top * (1.0f - wy) + bot * wy;
            }
        }
    return out;
}

// [1, C, H, W] tensor view of an image.
template <typename T = float>
TensorT<T> image_to_tensor(const Image& img) {
    TensorT<T> t({1, img.c, img.h, img.w});
    for (std::size_t i = 0; i < img.data.size(); ++i) t.data[i] = static_cast<T>(img.data[i]);
    return t;
}

}  // namespace fstnet
