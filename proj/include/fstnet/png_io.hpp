#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fstnet/check.hpp"
#include "fstnet/image.hpp"

namespace fstnet {

namespace detail {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::vector<std::uint8_t>& payload) {
    put_be32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const auto crc = static_cast<std::uint32_t>(
        ::crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start)));
    put_be32(out, crc);
}

inline std::uint8_t paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
    if (pb <= pc) return static_cast<std::uint8_t>(b);
    return static_cast<std::uint8_t>(c);
}

}  // namespace detail

// 8-bit PNG writer (grayscale or RGB, filter 0, zlib-deflated).
inline void write_png(const std::filesystem::path& path, const Image& img) {
    require(img.c == 1 || img.c == 3, "write_png: image must have 1 or 3 channels, got ", img.c);
    require(img.h >= 1 && img.w >= 1, "write_png: empty image");

    const int bpp = img.c;
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(img.h) * (1 + img.w * bpp));
    std::size_t o = 0;
    for (int y = 0; y < img.h; ++y) {
        raw[o++] = 0;  // filter: None
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < img.c; ++ch)
                raw[o++] = static_cast<std::uint8_t>(
                    std::lround(clamp01(img.at(ch, y, x)) * 255.0f));
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> deflated(bound);
    require_data(compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                           6) == Z_OK,
                 "write_png: deflate failed for ", path.string());
    deflated.resize(bound);

    std::vector<std::uint8_t> out;
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), sig, sig + 8);
    std::vector<std::uint8_t> ihdr;
    detail::put_be32(ihdr, static_cast<std::uint32_t>(img.w));
    detail::put_be32(ihdr, static_cast<std::uint32_t>(img.h));
    ihdr.push_back(8);                                   // bit depth
    ihdr.push_back(img.c == 1 ? 0 : 2);                  // gray / truecolor
    ihdr.push_back(0);                                   // compression
    ihdr.push_back(0);                                   // filter method
    ihdr.push_back(0);                                   // no interlace
    detail::append_chunk(out, "IHDR", ihdr);
    detail::append_chunk(out, "IDAT", deflated);
    detail::append_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require_data(f.good(), "write_png: cannot open ", path.string());
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    require_data(f.good(), "write_png: write failed for ", path.string());
}

// 8-bit PNG reader for color types 0 (gray), 2 (RGB) and 6 (RGBA, alpha
// dropped). Values land in [0,1].
inline Image read_png(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require_data(f.good(), "read_png: cannot open ", path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    require_data(bytes.size() > 8 && std::memcmp(bytes.data(), sig, 8) == 0,
                 "read_png: not a PNG file: ", path.string());

    int w = 0, h = 0, color_type = -1;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    while (pos + 12 <= bytes.size()) {
        const std::uint32_t len = detail::get_be32(bytes.data() + pos);
        require_data(pos + 12 + len <= bytes.size(), "read_png: truncated chunk in ",
                     path.string());
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* payload = bytes.data() + pos + 8;
        if (std::memcmp(type, "IHDR", 4) == 0) {
            require_data(len == 13, "read_png: bad IHDR in ", path.string());
            w = static_cast<int>(detail::get_be32(payload));
            h = static_cast<int>(detail::get_be32(payload + 4));
            const int bit_depth = payload[8];
            color_type = payload[9];
            require_data(bit_depth == 8, "read_png: only 8-bit PNGs supported, got depth ",
                         bit_depth, " in ", path.string());
            require_data(color_type == 0 || color_type == 2 || color_type == 6,
                         "read_png: unsupported color type ", color_type, " in ", path.string());
            require_data(payload[12] == 0, "read_png: interlaced PNGs unsupported: ",
                         path.string());
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    require_data(w > 0 && h > 0 && !idat.empty(), "read_png: missing image data in ",
                 path.string());

    const int src_ch = color_type == 0 ? 1 : (color_type == 2 ? 3 : 4);
    const std::size_t stride = static_cast<std::size_t>(w) * src_ch;
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(h) * (stride + 1));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    require_data(uncompress(raw.data(), &raw_len, idat.data(),
                            static_cast<uLong>(idat.size())) == Z_OK &&
                     raw_len == raw.size(),
                 "read_png: inflate failed for ", path.string());

    // undo per-row filters in place
    std::vector<std::uint8_t> prev(stride, 0);
    std::vector<std::uint8_t> cur(stride);
    const int out_ch = src_ch == 4 ? 3 : src_ch;
    Image img(h, w, out_ch);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t filter = raw[static_cast<std::size_t>(y) * (stride + 1)];
        const std::uint8_t* src = raw.data() + static_cast<std::size_t>(y) * (stride + 1) + 1;
        require_data(filter <= 4, "read_png: bad filter ", static_cast<int>(filter), " in ",
                     path.string());
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= static_cast<std::size_t>(src_ch) ? cur[i - src_ch] : 0;
            const int b = prev[i];
            const int c = i >= static_cast<std::size_t>(src_ch) ? prev[i - src_ch] : 0;
            int v = src[i];
            switch (filter) {
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += detail::paeth(a, b, c); break;
                default: break;
            }
            cur[i] = static_cast<std::uint8_t>(v & 0xff);
        }
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < out_ch; ++ch)
                img.at(ch, y, x) =
                    static_cast<float>(cur[static_cast<std::size_t>(x) * src_ch + ch]) / 255.0f;
        std::swap(prev, cur);
    }
    return img;
}

}  // namespace fstnet
