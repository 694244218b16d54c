#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fstnet/data.hpp"
#include "fstnet/ops.hpp"
#include "test_util.hpp"

using namespace fstnet;

namespace {

std::vector<unsigned char> file_bytes(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("rgb_to_hsv definitional pixels") {
    float h, s, v;
    rgb_to_hsv_pixel(1.0f, 0.0f, 0.0f, h, s, v);
    CHECK(h == 0.0f);
    CHECK(s == 1.0f);
    CHECK(v == 1.0f);

    rgb_to_hsv_pixel(0.5f, 0.5f, 0.5f, h, s, v);
    CHECK(h == 0.0f);
    CHECK(s == 0.0f);
    CHECK(v == 0.5f);

    rgb_to_hsv_pixel(0.0f, 1.0f, 0.0f, h, s, v);
    CHECK(h == doctest::Approx(1.0f / 3.0f));
    rgb_to_hsv_pixel(0.0f, 0.0f, 1.0f, h, s, v);
    CHECK(h == doctest::Approx(2.0f / 3.0f));
}

TEST_CASE("hsv round trip on random non-achromatic pixels") {
    Rng rng(400);
    for (int trial = 0; trial < 500; ++trial) {
        float r = static_cast<float>(rng.uniform());
        float g = static_cast<float>(rng.uniform());
        float b = static_cast<float>(rng.uniform());
        const float spread = std::max({r, g, b}) - std::min({r, g, b});
        if (spread < 1e-3f || std::max({r, g, b}) < 1e-3f) continue;
        float h, s, v, r2, g2, b2;
        rgb_to_hsv_pixel(r, g, b, h, s, v);
        hsv_to_rgb_pixel(h, s, v, r2, g2, b2);
        CHECK(std::abs(r - r2) < 1e-5f);
        CHECK(std::abs(g - g2) < 1e-5f);
        CHECK(std::abs(b - b2) < 1e-5f);
    }
}

TEST_CASE("hsv stays in [0,1] on random pixels and all corner colors") {
    Rng rng(401);
    auto check_pixel = [](float r, float g, float b) {
        float h, s, v;
        rgb_to_hsv_pixel(r, g, b, h, s, v);
        CHECK(h >= 0.0f);
        CHECK(h <= 1.0f);
        CHECK(s >= 0.0f);
        CHECK(s <= 1.0f);
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    };
    for (int i = 0; i < 8; ++i)
        check_pixel(static_cast<float>(i & 1), static_cast<float>((i >> 1) & 1),
                    static_cast<float>((i >> 2) & 1));
    for (int trial = 0; trial < 500; ++trial)
        check_pixel(static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                    static_cast<float>(rng.uniform()));
}

TEST_CASE("png round trip is byte-exact at 8 bits") {
    testutil::TempDir tmp("png");
    Rng rng(402);
    Image img(13, 17, 3);
    for (auto& v : img.data)
        v = static_cast<float>(rng.below(256)) / 255.0f;  // representable at 8 bits
    const auto path = tmp.path() / "x.png";
    write_png(path, img);
    const Image back = read_png(path);
    REQUIRE(back.h == 13);
    REQUIRE(back.w == 17);
    REQUIRE(back.c == 3);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        CHECK(back.data[i] == doctest::Approx(img.data[i]).epsilon(1e-6));

    Image gray(9, 8, 1);
    for (auto& v : gray.data) v = static_cast<float>(rng.below(256)) / 255.0f;
    write_png(tmp.path() / "g.png", gray);
    const Image gback = read_png(tmp.path() / "g.png");
    REQUIRE(gback.c == 1);
    for (std::size_t i = 0; i < gray.data.size(); ++i)
        CHECK(gback.data[i] == doctest::Approx(gray.data[i]).epsilon(1e-6));
}

TEST_CASE("png reader rejects junk") {
    testutil::TempDir tmp("pngbad");
    const auto path = tmp.path() / "junk.png";
    std::ofstream(path, std::ios::binary) << "this is not a png";
    CHECK_THROWS_AS(read_png(path), DataError);
    CHECK_THROWS_AS(read_png(tmp.path() / "missing.png"), DataError);
}

TEST_CASE("resize_bilinear preserves constants and averages structure") {
    Image img(4, 4, 1, 0.6f);
    const Image small = resize_bilinear(img, 2, 2);
    for (float v : small.data) CHECK(v == doctest::Approx(0.6f));
    const Image same = resize_bilinear(img, 4, 4);
    CHECK(same.data == img.data);
}

TEST_CASE("live depth label spans [0,1] with a central bump") {
    for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
        const DepthLabel label = make_live_depth_label(seed);
        REQUIRE(label.size == 32);
        CHECK(label.is_live);
        CHECK(*std::max_element(label.map.begin(), label.map.end()) == 1.0f);
        CHECK(*std::min_element(label.map.begin(), label.map.end()) == 0.0f);
        const float center = label.map[16 * 32 + 16];
        const float corner = label.map[0];
        CHECK(center > corner);

        // smoothness: neighboring values stay close
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x + 1 < 32; ++x) {
                CHECK(std::abs(label.map[y * 32 + x] - label.map[y * 32 + x + 1]) < 0.2f);
                CHECK(std::abs(label.map[x * 32 + y] - label.map[(x + 1) * 32 + y]) < 0.2f);
            }
    }
    CHECK(make_live_depth_label(5).map == make_live_depth_label(5).map);
}

TEST_CASE("spoof depth label is identically zero") {
    const DepthLabel label = make_spoof_depth_label();
    for (float v : label.map) CHECK(v == 0.0f);
    CHECK_FALSE(label.is_live);

    auto zero_pred = make_var(Tensor({32, 32}));
    CHECK(l2_loss(zero_pred, depth_label_tensor(label))->value.data[0] == 0.0f);
    auto ones_pred = make_var(Tensor({32, 32}, 1.0f));
    CHECK(l2_loss(ones_pred, depth_label_tensor(label))->value.data[0] == doctest::Approx(1.0f));
}

TEST_CASE("toy dataset generation: counts, determinism, manifest round trip") {
    testutil::TempDir tmp("toy");
    ToyDatasetParams params;
    params.frames = 3;
    params.image_size = 32;

    const DatasetManifest m =
        generate_toy_dataset(tmp.path() / "a", {{"train", 4, 4}}, params, 123);
    CHECK(m.entries.size() == 8);
    int live = 0, spoof = 0;
    for (const auto& e : m.entries) (e.label == Label::Live ? live : spoof)++;
    CHECK(live == 4);
    CHECK(spoof == 4);

    const DatasetManifest loaded = load_manifest(tmp.path() / "a" / "manifest.tsv");
    REQUIRE(loaded.entries.size() == m.entries.size());
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(loaded.entries[i].dir == m.entries[i].dir);
        CHECK(loaded.entries[i].label == m.entries[i].label);
        CHECK(loaded.entries[i].id == m.entries[i].id);
        CHECK(loaded.entries[i].split == m.entries[i].split);
    }

    // bitwise reproducibility of every generated file
    generate_toy_dataset(tmp.path() / "b", {{"train", 4, 4}}, params, 123);
    for (const auto& e : m.entries)
        for (int f = 0; f < params.frames; ++f) {
            const auto rel = e.dir + "/" + frame_file_name(f);
            CHECK(file_bytes(tmp.path() / "a" / rel) == file_bytes(tmp.path() / "b" / rel));
        }

    // different seed changes the data
    generate_toy_dataset(tmp.path() / "c", {{"train", 4, 4}}, params, 124);
    CHECK(file_bytes(tmp.path() / "a" / m.entries[0].dir / frame_file_name(0)) !=
          file_bytes(tmp.path() / "c" / m.entries[0].dir / frame_file_name(0)));
}

TEST_CASE("spoof sequences carry at least twice the live high-band energy") {
    testutil::TempDir tmp("sep");
    ToyDatasetParams params;
    params.frames = 3;
    params.image_size = 64;

    const DatasetManifest m =
        generate_toy_dataset(tmp.path() / "d", {{"train", 6, 6}}, params, 7);
    double live_energy = 0.0, spoof_energy = 0.0;
    int live_frames = 0, spoof_frames = 0;
    for (const auto& e : m.entries) {
        const FrameSequence seq =
            load_sequence(m.entry_dir(e), params.frames, params.image_size, e.label, e.id);
        for (const Image& f : seq.frames) {
            const double energy =
                high_band_energy(luma(f), params.image_size, params.image_size, 0.25);
            if (e.label == Label::Live) {
                live_energy += energy;
                ++live_frames;
            } else {
                spoof_energy += energy;
                ++spoof_frames;
            }
        }
    }
    CHECK(spoof_energy / spoof_frames >= 2.0 * (live_energy / live_frames));
}

TEST_CASE("load_sequence contracts") {
    testutil::TempDir tmp("seq");
    ToyDatasetParams params;
    params.frames = 3;
    params.image_size = 32;
    const DatasetManifest m =
        generate_toy_dataset(tmp.path() / "e", {{"train", 1, 0}}, params, 9);
    const auto dir = m.entry_dir(m.entries[0]);

    const FrameSequence seq = load_sequence(dir, 3, 32);
    CHECK(seq.frames.size() == 3);
    CHECK(seq.frames[0].h == 32);

    // resize on load
    const FrameSequence small = load_sequence(dir, 3, 16);
    CHECK(small.frames[0].h == 16);

    // deterministic decode
    const FrameSequence again = load_sequence(dir, 3, 32);
    for (std::size_t t = 0; t < 3; ++t) CHECK(again.frames[t].data == seq.frames[t].data);

    CHECK_THROWS_AS(load_sequence(dir, 4, 32), DataError);
    CHECK_THROWS_AS(load_sequence(tmp.path() / "nowhere", 1, 32), DataError);
}

TEST_CASE("manifest validation rejects ids straddling splits") {
    DatasetManifest m;
    m.entries.push_back({"a", Label::Live, "x", "train"});
    m.entries.push_back({"b", Label::Live, "x", "test"});
    CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("depth labels load from cache and fall back to the id-derived bump") {
    testutil::TempDir tmp("lbl");
    ToyDatasetParams params;
    params.frames = 2;
    params.image_size = 32;
    const DatasetManifest m =
        generate_toy_dataset(tmp.path() / "f", {{"train", 1, 1}}, params, 11);

    const ManifestEntry& live_e = m.entries[0];
    const ManifestEntry& spoof_e = m.entries[1];
    REQUIRE(live_e.label == Label::Live);
    REQUIRE(spoof_e.label == Label::Spoof);

    const Tensor cached = load_depth_label(m, live_e, 32);
    CHECK(cached.dims == std::vector<int>{32, 32});
    CHECK(*std::max_element(cached.data.begin(), cached.data.end()) == 1.0f);

    // resized on demand
    const Tensor small = load_depth_label(m, live_e, 4);
    CHECK(small.dims == std::vector<int>{4, 4});
    for (float v : small.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }

    // removing the cache falls back to the same procedural label
    std::filesystem::remove(m.entry_dir(live_e) / depth_label_file_name());
    const Tensor fallback = load_depth_label(m, live_e, 32);
    CHECK(fallback.data == cached.data);

    const Tensor spoof_label = load_depth_label(m, spoof_e, 8);
    for (float v : spoof_label.data) CHECK(v == 0.0f);
}
