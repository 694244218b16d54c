#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "fstnet/check.hpp"

namespace fstnet {

// 2-D complex spectrum. Transforms run in double regardless of the image
// element type so round-trip and Parseval hold to tight tolerances.
struct ComplexSpectrum {
    int h = 0, w = 0;
    std::vector<double> re, im;
    bool dc_centered = false;

    std::size_t size() const { return re.size(); }
    std::size_t at(int y, int x) const { return static_cast<std::size_t>(y) * w + x; }
    double magnitude(std::size_t i) const { return std::sqrt(re[i] * re[i] + im[i] * im[i]); }
    double peak_magnitude() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, re[i] * re[i] + im[i] * im[i]);
        return std::sqrt(m);
    }
    double energy() const {
        double e = 0.0;
        for (std::size_t i = 0; i < size(); ++i) e += re[i] * re[i] + im[i] * im[i];
        return e;
    }
};

inline bool is_pow2(int n) { return n >= 1 && (n & (n - 1)) == 0; }

namespace detail {

// In-place iterative radix-2 transform of n points at the given stride.
// sign = -1 for the forward transform, +1 for the inverse (unscaled).
inline void fft_radix2(double* re, double* im, int n, std::size_t stride, int sign) {
    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i * stride], re[j * stride]);
            std::swap(im[i * stride], im[j * stride]);
        }
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / len;
        const double wr = std::cos(ang), wi = std::sin(ang);
        for (int i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (int k = 0; k < len / 2; ++k) {
                const std::size_t a = static_cast<std::size_t>(i + k) * stride;
                const std::size_t b = static_cast<std::size_t>(i + k + len / 2) * stride;
                const double tr = re[b] * cr - im[b] * ci;
                const double ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                const double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

inline void fft2_inplace(ComplexSpectrum& s, int sign) {
    for (int y = 0; y < s.h; ++y) fft_radix2(s.re.data() + s.at(y, 0), s.im.data() + s.at(y, 0), s.w, 1, sign);
    for (int x = 0; x < s.w; ++x) fft_radix2(s.re.data() + x, s.im.data() + x, s.h, static_cast<std::size_t>(s.w), sign);
}

inline void require_pow2_extents(int h, int w, const char* opname) {
    require(h >= 2 && w >= 2 && is_pow2(h) && is_pow2(w), opname, ": extents ", h, "x", w,
            " must be powers of two >= 2; resize the image (e.g. bilinear) to a power-of-two "
            "size first");
}

}  // namespace detail

// Unnormalized forward DFT of a real image (row-major, values as given).
template <typename T>
ComplexSpectrum fft2d(const std::vector<T>& image, int h, int w) {
    detail::require_pow2_extents(h, w, "fft2d");
    require(image.size() == static_cast<std::size_t>(h) * w, "fft2d: image size ", image.size(),
            " != ", h, "x", w);
    ComplexSpectrum s;
    s.h = h;
    s.w = w;
    s.re.resize(image.size());
    s.im.assign(image.size(), 0.0);
    for (std::size_t i = 0; i < image.size(); ++i) s.re[i] = static_cast<double>(image[i]);
    detail::fft2_inplace(s, -1);
    return s;
}

// Largest deviation from conjugate symmetry, relative to the peak magnitude
// (floored at 1 so an all-zero spectrum is trivially symmetric).
inline double hermitian_violation(const ComplexSpectrum& s) {
    double worst = 0.0;
    for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) {
            const std::size_t a = s.at(y, x);
            const std::size_t b = s.at((s.h - y) % s.h, (s.w - x) % s.w);
            const double dr = s.re[a] - s.re[b];
            const double di = s.im[a] + s.im[b];
            worst = std::max(worst, std::sqrt(dr * dr + di * di));
        }
    return worst / std::max(1.0, s.peak_magnitude());
}

// Toggle between natural and DC-centered layouts (involution for even dims).
inline ComplexSpectrum fftshift(const ComplexSpectrum& s) {
    ComplexSpectrum out;
    out.h = s.h;
    out.w = s.w;
    out.re.resize(s.size());
    out.im.resize(s.size());
    out.dc_centered = !s.dc_centered;
    const int sy = s.h / 2, sx = s.w / 2;
    for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) {
            const std::size_t src = s.at(y, x);
            const std::size_t dst = s.at((y + sy) % s.h, (x + sx) % s.w);
            out.re[dst] = s.re[src];
            out.im[dst] = s.im[src];
        }
    return out;
}

// Inverse DFT back to a real image. Input must be (near-)Hermitian; the
// residual imaginary part is checked and discarded.
inline std::vector<float> ifft2d(const ComplexSpectrum& spectrum) {
    detail::require_pow2_extents(spectrum.h, spectrum.w, "ifft2d");
    const ComplexSpectrum* src = &spectrum;
    ComplexSpectrum uncentered;
    if (spectrum.dc_centered) {
        uncentered = fftshift(spectrum);
        src = &uncentered;
    }
    const double violation = hermitian_violation(*src);
    require(violation <= 1e-3,
            "ifft2d: spectrum is not Hermitian-symmetric (relative violation ", violation, ")");

    ComplexSpectrum s = *src;
    detail::fft2_inplace(s, +1);
    const double scale = 1.0 / (static_cast<double>(s.h) * s.w);
    std::vector<float> out(s.size());
    double peak_real = 0.0, peak_imag = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = s.re[i] * scale;
        out[i] = static_cast<float>(v);
        peak_real = std::max(peak_real, std::abs(v));
        peak_imag = std::max(peak_imag, std::abs(s.im[i] * scale));
    }
    if (peak_imag > 1e-6 * std::max(1.0, peak_real))
        throw NumericError(detail::concat("ifft2d: residual imaginary magnitude ", peak_imag,
                                          " exceeds tolerance"));
    return out;
}

}  // namespace fstnet
