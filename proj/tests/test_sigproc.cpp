#include <doctest.h>

#include <cmath>
#include <vector>

#include "gprseg/sigproc.hpp"

using namespace gprseg;

namespace {

constexpr double kF0 = 600e6;
constexpr double kDt = 2.3350677933821873e-11;

// Mexican-hat pulse centered on `center`, width in samples.
double pulse(int r, int center, double width) {
    const double u = (r - center) / width;
    return (1.0 - 2.0 * u * u) * std::exp(-u * u);
}

GridD aligned_scan(int rows, int cols, int break_row) {
    GridD g(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) g(r, c) = pulse(r, break_row, 4.0);
    return g;
}

double rms(const GridD& g, int row_lo, int row_hi) {
    double acc = 0.0;
    int n = 0;
    for (int r = row_lo; r < row_hi; ++r)
        for (int c = 0; c < g.cols(); ++c) {
            acc += g(r, c) * g(r, c);
            ++n;
        }
    return std::sqrt(acc / n);
}

}  // namespace

// === static correction ===

TEST_CASE("aligned scans pass through static correction unchanged") {
    const GridD g = aligned_scan(120, 9, 30);
    const GridD out = static_correct(g);
    CHECK(out == g);
}

TEST_CASE("a trace delayed by 5 samples is shifted back up by 5") {
    GridD g = aligned_scan(120, 9, 30);
    for (int r = 119; r >= 0; --r) g(r, 4) = r >= 5 ? g(r - 5, 4) : 0.0;
    const GridD out = static_correct(g);
    for (int r = 0; r < 115; ++r)
        CHECK(out(r, 4) == doctest::Approx(g(r, 0)).epsilon(1e-12));
    // other traces already sit on the median row and stay put
    for (int r = 0; r < 120; ++r) CHECK(out(r, 0) == g(r, 0));
}

TEST_CASE("threshold 1.0 aligns on each trace's global maximum") {
    GridD g(100, 3, 0.0);
    for (int c = 0; c < 3; ++c) {
        g(10 + c, c) = 0.5;        // early, sub-peak arrival
        g(40 + 10 * c, c) = -1.0;  // global |max|
    }
    const GridD out = static_correct(g, 1.0);
    // median of {40, 50, 60} is 50: every global max lands on row 50
    for (int c = 0; c < 3; ++c) CHECK(out(50, c) == -1.0);
}

TEST_CASE("an all-zero trace is a dead trace") {
    GridD g = aligned_scan(64, 5, 20);
    for (int r = 0; r < 64; ++r) g(r, 2) = 0.0;
    CHECK_THROWS_AS(static_correct(g), ConfigError);
}

// === dewow ===

TEST_CASE("dewow zeroes constant traces") {
    GridD g(200, 4, 3.25);
    const GridD out = dewow(g, kF0, kDt);  // window 71 samples
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == doctest::Approx(0.0));
    const GridD out2 = dewow(g, kF0, 1e-13);  // window covers the whole trace
    for (size_t i = 0; i < out2.size(); ++i) CHECK(out2.data()[i] == doctest::Approx(0.0));
}

TEST_CASE("a window longer than the trace subtracts the trace mean") {
    GridD g(50, 2);
    Rng rng(5);
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1, 1);
    const GridD out = dewow(g, kF0, 1e-13);  // round(1/(f0 dt)) >> 50
    for (int c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (int r = 0; r < 50; ++r) mean += g(r, c);
        mean /= 50;
        for (int r = 0; r < 50; ++r)
            CHECK(out(r, c) == doctest::Approx(g(r, c) - mean).epsilon(1e-12));
    }
}

TEST_CASE("dewow keeps a sinusoid at the dominant frequency") {
    GridD g(800, 1);
    for (int r = 0; r < 800; ++r) g(r, 0) = std::sin(2.0 * kPi * kF0 * r * kDt);
    const GridD out = dewow(g, kF0, kDt);
    double peak = 0.0;
    for (int r = 100; r < 700; ++r) peak = std::max(peak, std::abs(out(r, 0)));
    CHECK(peak >= 0.9);
    CHECK(peak <= 1.1);
}

// === mean-trace removal ===

TEST_CASE("laterally uniform scans vanish under mean-trace removal") {
    GridD g(64, 12);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 12; ++c) g(r, c) = std::sin(0.3 * r);
    const GridD out = remove_mean_trace(g);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == doctest::Approx(0.0));
}

TEST_CASE("every row of the output has zero mean") {
    GridD g(40, 17);
    Rng rng(9);
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-2, 2);
    const GridD out = remove_mean_trace(g);
    for (int r = 0; r < 40; ++r) {
        double mean = 0.0;
        for (int c = 0; c < 17; ++c) mean += out(r, c);
        CHECK(std::abs(mean / 17) < 1e-12);
    }
}

TEST_CASE("mean-trace removal is idempotent") {
    GridD g(128, 99);
    Rng rng(21);
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1, 1);
    const GridD once = remove_mean_trace(g);
    const GridD twice = remove_mean_trace(once);
    for (size_t i = 0; i < once.size(); ++i)
        REQUIRE(std::abs(twice.data()[i] - once.data()[i]) <= 1e-9);
}

TEST_CASE("a curved reflector survives mean-trace removal") {
    // hyperbola-like event: apex row 100, curvature across 60 traces
    GridD g(400, 60, 0.0);
    auto center = [](int c) { return 100 + ((c - 30) * (c - 30)) / 12; };
    for (int c = 0; c < 60; ++c)
        for (int r = 0; r < 400; ++r) g(r, c) = pulse(r, center(c), 3.0);
    const GridD out = remove_mean_trace(g);
    double in_mask_before = 0.0;
    double in_mask_after = 0.0;
    for (int c = 0; c < 60; ++c)
        for (int r = 0; r < 400; ++r) {
            if (std::abs(r - center(c)) > 9) continue;
            in_mask_before += g(r, c) * g(r, c);
            in_mask_after += out(r, c) * out(r, c);
        }
    CHECK(in_mask_after >= 0.9 * in_mask_before);
}

// === bandpass ===

TEST_CASE("zero input gives zero output") {
    GridD g(256, 3, 0.0);
    const GridD out = bandpass(g, 0.25 * kF0, 2 * kF0, kDt);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == 0.0);
}

TEST_CASE("bandpass keeps the dominant frequency and rejects deep bass") {
    GridD in_band(800, 1);
    GridD low(800, 1);
    for (int r = 0; r < 800; ++r) {
        in_band(r, 0) = std::sin(2.0 * kPi * kF0 * r * kDt);
        low(r, 0) = std::sin(2.0 * kPi * 0.01 * kF0 * r * kDt);
    }
    const GridD out_band = bandpass(in_band, 0.25 * kF0, 2 * kF0, kDt);
    const GridD out_low = bandpass(low, 0.25 * kF0, 2 * kF0, kDt);
    const double gain_band = rms(out_band, 200, 600) / rms(in_band, 200, 600);
    const double gain_low = rms(out_low, 200, 600) / rms(low, 200, 600);
    CHECK(gain_band >= 0.9);
    CHECK(gain_low <= 0.05);
}

TEST_CASE("invalid bands and orders are rejected") {
    GridD g(64, 1, 1.0);
    CHECK_THROWS_AS(bandpass(g, 2 * kF0, 0.25 * kF0, kDt), ConfigError);   // lo > hi
    CHECK_THROWS_AS(bandpass(g, 0.25 * kF0, 1e12, kDt), ConfigError);     // past Nyquist
    CHECK_THROWS_AS(bandpass(g, 0.0, 2 * kF0, kDt), ConfigError);         // lo = 0
    CHECK_THROWS_AS(bandpass(g, 0.25 * kF0, 2 * kF0, kDt, 3), ConfigError);
}

// === bicubic resize ===

TEST_CASE("scan-sized resize produces the network input shape") {
    GridD g(800, 99);
    for (int r = 0; r < 800; ++r)
        for (int c = 0; c < 99; ++c) g(r, c) = std::sin(0.02 * r) * std::cos(0.1 * c);
    const GridD out = bicubic_resize(g, 256, 128);
    CHECK(out.rows() == 256);
    CHECK(out.cols() == 128);
}

TEST_CASE("identity-shape resize is exact") {
    GridD g(31, 23);
    Rng rng(14);
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1, 1);
    const GridD out = bicubic_resize(g, 31, 23);
    for (size_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(out.data()[i] - g.data()[i]) < 1e-6);
}

TEST_CASE("degree-1 fields are reproduced exactly away from clamped edges") {
    const int sr = 40;
    const int sc = 50;
    GridD g(sr, sc);
    for (int r = 0; r < sr; ++r)
        for (int c = 0; c < sc; ++c) g(r, c) = 2.0 * c + 3.0 * r;
    for (auto [orows, ocols] : {std::pair{64, 80}, std::pair{17, 23}}) {
        const GridD out = bicubic_resize(g, orows, ocols);
        for (int r = 0; r < orows; ++r) {
            const double src_r = (r + 0.5) * sr / orows - 0.5;
            if (src_r < 1.0 || src_r > sr - 3.0) continue;  // clamped support
            for (int c = 0; c < ocols; ++c) {
                const double src_c = (c + 0.5) * sc / ocols - 0.5;
                if (src_c < 1.0 || src_c > sc - 3.0) continue;
                REQUIRE(std::abs(out(r, c) - (2.0 * src_c + 3.0 * src_r)) < 1e-6);
            }
        }
    }
}

TEST_CASE("down-up round trip keeps smooth scans close") {
    GridD g(100, 60);
    for (int r = 0; r < 100; ++r)
        for (int c = 0; c < 60; ++c)
            g(r, c) = std::sin(2.0 * kPi * r / 50.0) * std::cos(2.0 * kPi * c / 40.0) +
                      0.5 * std::sin(2.0 * kPi * (r + c) / 70.0);
    const GridD big = bicubic_resize(g, 256, 128);
    const GridD back = bicubic_resize(big, 100, 60);
    double err = 0.0;
    double ref = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        err += (back.data()[i] - g.data()[i]) * (back.data()[i] - g.data()[i]);
        ref += g.data()[i] * g.data()[i];
    }
    CHECK(std::sqrt(err / ref) < 0.05);
}

TEST_CASE("nearest-neighbor label resize never invents classes") {
    GridU8 g(7, 9);
    Rng rng(4);
    for (size_t i = 0; i < g.size(); ++i)
        g.data()[i] = static_cast<uint8_t>(rng.uniform_int(0, 8));
    const GridU8 up = nearest_resize(g, 29, 37);
    for (size_t i = 0; i < up.size(); ++i) CHECK(up.data()[i] <= 8);
    // 2x upscale of a 2x2 checkerboard gives exact 2x2 blocks
    GridU8 cb(2, 2);
    cb(0, 0) = 1;
    cb(0, 1) = 2;
    cb(1, 0) = 3;
    cb(1, 1) = 4;
    const GridU8 blocks = nearest_resize(cb, 4, 4);
    CHECK(blocks(0, 0) == 1);
    CHECK(blocks(1, 1) == 1);
    CHECK(blocks(0, 2) == 2);
    CHECK(blocks(2, 1) == 3);
    CHECK(blocks(3, 3) == 4);
}

// === normalization and augmentation ===

TEST_CASE("normalize pins max magnitude to exactly 1") {
    GridD g(16, 16);
    Rng rng(33);
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-4, 2);
    const GridD out = normalize(g);
    double peak = 0.0;
    for (size_t i = 0; i < out.size(); ++i)
        peak = std::max(peak, std::abs(out.data()[i]));
    CHECK(peak == 1.0);
    // signs survive
    for (size_t i = 0; i < out.size(); ++i)
        CHECK((out.data()[i] >= 0) == (g.data()[i] >= 0));
}

TEST_CASE("normalize is scale invariant") {
    GridD g(8, 8);
    Rng rng(2);
    for (size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1, 1);
    GridD by8 = g;
    GridD by10 = g;
    for (size_t i = 0; i < g.size(); ++i) {
        by8.data()[i] *= 8.0;    // exact in binary floating point
        by10.data()[i] *= 10.0;
    }
    const GridD n0 = normalize(g);
    const GridD n8 = normalize(by8);
    const GridD n10 = normalize(by10);
    CHECK(n8 == n0);
    for (size_t i = 0; i < g.size(); ++i)
        CHECK(n10.data()[i] == doctest::Approx(n0.data()[i]).epsilon(1e-12));
}

TEST_CASE("all-zero scans are degenerate") {
    GridD g(4, 4, 0.0);
    CHECK_THROWS_AS(normalize(g), ConfigError);
}

TEST_CASE("zero-amplitude augmentation reduces to renormalization") {
    GridD m(32, 32);
    GridD n(32, 32);
    Rng rng(8);
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
    for (size_t i = 0; i < n.size(); ++i) n.data()[i] = rng.uniform(-1, 1);
    NoiseLibrary lib;
    lib.entries = {n};
    lib.scale_lo = lib.scale_hi = 0.0;
    const GridD out = augment_with_noise(m, lib, 123);
    const GridD expected = normalize(m);
    CHECK(out == expected);
}

TEST_CASE("seeded augmentation is reproducible") {
    GridD m(16, 16);
    Rng rng(17);
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
    NoiseLibrary lib;
    for (int k = 0; k < 3; ++k) {
        GridD n(16, 16);
        for (size_t i = 0; i < n.size(); ++i) n.data()[i] = rng.uniform(-1, 1);
        lib.entries.push_back(n);
    }
    const GridD a = augment_with_noise(m, lib, 99);
    const GridD b = augment_with_noise(m, lib, 99);
    const GridD c = augment_with_noise(m, lib, 100);
    CHECK(a == b);
    bool differs = false;
    for (size_t i = 0; i < a.size() && !differs; ++i)
        differs = a.data()[i] != c.data()[i];
    CHECK(differs);
}

TEST_CASE("alpha 0.3 mixes scan plus scaled noise, then renormalizes") {
    GridD m(64, 64);
    GridD n(64, 64);
    Rng rng(55);
    for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    for (size_t i = 0; i < n.size(); ++i) n.data()[i] = rng.normal();
    const GridD out = augment_with_noise(m, n, 0.3);
    GridD mixed(64, 64);
    for (size_t i = 0; i < m.size(); ++i)
        mixed.data()[i] = m.data()[i] + 0.3 * n.data()[i];
    const GridD expected = normalize(mixed);
    CHECK(out == expected);
    // the mix keeps signal dominant: correlation with the clean scan stays high
    double dot = 0.0;
    double rm = 0.0;
    double ro = 0.0;
    for (size_t i = 0; i < m.size(); ++i) {
        dot += out.data()[i] * m.data()[i];
        rm += m.data()[i] * m.data()[i];
        ro += out.data()[i] * out.data()[i];
    }
    CHECK(dot / std::sqrt(rm * ro) > 0.9);
}

TEST_CASE("bad augmentation inputs are rejected") {
    GridD m(8, 8, 1.0);
    GridD wrong(8, 9, 1.0);
    CHECK_THROWS_AS(augment_with_noise(m, wrong, 0.1), ConfigError);
    NoiseLibrary empty;
    CHECK_THROWS_AS(augment_with_noise(m, empty, 1), ConfigError);
}

// === full chain ===

TEST_CASE("preprocess emits a normalized network-shaped scan") {
    // synthetic radargram: direct wave on every trace plus one deeper event
    GridD g(800, 99);
    for (int c = 0; c < 99; ++c)
        for (int r = 0; r < 800; ++r)
            g(r, c) = pulse(r, 90, 8.0) + 0.4 * pulse(r, 300 + c / 4, 8.0);
    PreprocessConfig cfg;
    cfg.dt = kDt;
    const GridD out = preprocess(g, cfg);
    CHECK(out.rows() == 256);
    CHECK(out.cols() == 128);
    double peak = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
        REQUIRE(std::isfinite(out.data()[i]));
        peak = std::max(peak, std::abs(out.data()[i]));
    }
    CHECK(peak == 1.0);
}

TEST_CASE("an isolated reflection keeps its polarity through the chain") {
    GridD g(800, 99);
    for (int c = 0; c < 99; ++c) {
        for (int r = 0; r < 800; ++r) {
            g(r, c) = 0.3 * pulse(r, 80, 6.0);
            if (c >= 38 && c < 60) g(r, c) += pulse(r, 420, 10.0);  // positive blob
        }
    }
    PreprocessConfig cfg;
    cfg.dt = kDt;
    const GridD out = preprocess(g, cfg);
    // the blob's neighborhood in the resized scan
    double best = 0.0;
    for (int r = 120; r < 148; ++r)
        for (int c = 45; c < 80; ++c)
            if (std::abs(out(r, c)) > std::abs(best)) best = out(r, c);
    CHECK(best > 0.0);
}
