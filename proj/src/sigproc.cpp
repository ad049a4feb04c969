#include "gprseg/sigproc.hpp"

#include <algorithm>
#include <cmath>

namespace gprseg {

GridD grid_to_double(const GridF& g) {
    GridD out(g.rows(), g.cols());
    for (size_t i = 0; i < g.size(); ++i) out.data()[i] = g.data()[i];
    return out;
}

GridF grid_to_float(const GridD& g) {
    GridF out(g.rows(), g.cols());
    for (size_t i = 0; i < g.size(); ++i)
        out.data()[i] = static_cast<float>(g.data()[i]);
    return out;
}

GridD static_correct(const GridD& scan, double threshold) {
    if (threshold <= 0 || threshold > 1)
        throw ConfigError("static_correct: threshold must lie in (0, 1]");
    const int rows = scan.rows();
    const int cols = scan.cols();
    std::vector<int> first_break(cols, 0);
    for (int c = 0; c < cols; ++c) {
        double peak = 0.0;
        for (int r = 0; r < rows; ++r) peak = std::max(peak, std::abs(scan(r, c)));
        if (peak == 0.0)
            throw ConfigError("static_correct: dead-trace at column " + std::to_string(c));
        const double level = threshold * peak;
        for (int r = 0; r < rows; ++r) {
            if (std::abs(scan(r, c)) >= level) {
                first_break[c] = r;
                break;
            }
        }
    }
    std::vector<int> sorted = first_break;
    const size_t mid = (sorted.size() - 1) / 2;
    std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
    const int median = sorted[mid];

    GridD out(rows, cols);
    for (int c = 0; c < cols; ++c) {
        const int shift = median - first_break[c];
        for (int r = 0; r < rows; ++r) {
            const int src = r - shift;
            out(r, c) = (src >= 0 && src < rows) ? scan(src, c) : 0.0;
        }
    }
    return out;
}

GridD dewow(const GridD& scan, double f0, double dt) {
    if (f0 <= 0 || dt <= 0) throw ConfigError("dewow: f0 and dt must be positive");
    const int rows = scan.rows();
    const int cols = scan.cols();
    const int w = std::max(1, static_cast<int>(std::llround(1.0 / (f0 * dt))));
    GridD out(rows, cols);

    std::vector<double> prefix(rows + 1);
    for (int c = 0; c < cols; ++c) {
        prefix[0] = 0.0;
        for (int r = 0; r < rows; ++r) prefix[r + 1] = prefix[r] + scan(r, c);
        if (w >= rows) {
            const double mean = prefix[rows] / rows;
            for (int r = 0; r < rows; ++r) out(r, c) = scan(r, c) - mean;
            continue;
        }
        const int half_lo = (w - 1) / 2;
        const int half_hi = w / 2;
        for (int r = 0; r < rows; ++r) {
            const int lo = std::max(0, r - half_lo);
            const int hi = std::min(rows - 1, r + half_hi);
            const double mean = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
            out(r, c) = scan(r, c) - mean;
        }
    }
    return out;
}

GridD remove_mean_trace(const GridD& scan) {
    const int rows = scan.rows();
    const int cols = scan.cols();
    GridD out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) sum += scan(r, c);
        const double mean = sum / cols;
        for (int c = 0; c < cols; ++c) out(r, c) = scan(r, c) - mean;
    }
    return out;
}

namespace detail {

Biquad design_lowpass(double fc, double fs, double q) {
    const double w0 = 2.0 * kPi * fc / fs;
    const double cw = std::cos(w0);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

Biquad design_highpass(double fc, double fs, double q) {
    const double w0 = 2.0 * kPi * fc / fs;
    const double cw = std::cos(w0);
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 + cw) / 2.0 / a0;
    s.b1 = -(1.0 + cw) / a0;
    s.b2 = s.b0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    return s;
}

namespace {

void run_cascade(const std::vector<Biquad>& sections, std::vector<double>& x) {
    for (const auto& s : sections) {
        double z1 = 0.0;
        double z2 = 0.0;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace

std::vector<double> filtfilt(const std::vector<Biquad>& sections,
                             const std::vector<double>& x) {
    std::vector<double> y = x;
    run_cascade(sections, y);
    std::reverse(y.begin(), y.end());
    run_cascade(sections, y);
    std::reverse(y.begin(), y.end());
    return y;
}

}  // namespace detail

GridD bandpass(const GridD& scan, double band_lo_hz, double band_hi_hz, double dt,
               int order) {
    if (dt <= 0) throw ConfigError("bandpass: dt must be positive");
    if (order < 2 || order % 2 != 0)
        throw ConfigError("bandpass: order must be a positive even number");
    const double fs = 1.0 / dt;
    if (band_lo_hz <= 0 || band_lo_hz >= band_hi_hz || band_hi_hz >= fs / 2)
        throw ConfigError("bandpass: band must satisfy 0 < lo < hi < Nyquist");

    // Butterworth of even order N as N/2 cascaded second-order sections with
    // the standard pole-pair Q values.
    std::vector<detail::Biquad> sections;
    for (int k = 0; k < order / 2; ++k) {
        const double q = 1.0 / (2.0 * std::cos((2.0 * k + 1.0) * kPi / (2.0 * order)));
        sections.push_back(detail::design_highpass(band_lo_hz, fs, q));
    }
    for (int k = 0; k < order / 2; ++k) {
        const double q = 1.0 / (2.0 * std::cos((2.0 * k + 1.0) * kPi / (2.0 * order)));
        sections.push_back(detail::design_lowpass(band_hi_hz, fs, q));
    }

    const int rows = scan.rows();
    const int cols = scan.cols();
    GridD out(rows, cols);
    std::vector<double> trace(rows);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) trace[r] = scan(r, c);
        const auto filtered = detail::filtfilt(sections, trace);
        for (int r = 0; r < rows; ++r) out(r, c) = filtered[r];
    }
    return out;
}

namespace {

double keys_weight(double t) {
    constexpr double a = -0.5;
    const double at = std::abs(t);
    if (at <= 1.0) return ((a + 2.0) * at - (a + 3.0)) * at * at + 1.0;
    if (at < 2.0) return ((a * at - 5.0 * a) * at + 8.0 * a) * at - 4.0 * a;
    return 0.0;
}

struct ResampleTap {
    int idx[4];
    double w[4];
};

std::vector<ResampleTap> bicubic_taps(int n_src, int n_dst) {
    std::vector<ResampleTap> taps(n_dst);
    const double ratio = static_cast<double>(n_src) / n_dst;
    for (int j = 0; j < n_dst; ++j) {
        const double s = (j + 0.5) * ratio - 0.5;
        const int base = static_cast<int>(std::floor(s));
        for (int k = 0; k < 4; ++k) {
            const int src = base - 1 + k;
            taps[j].idx[k] = std::clamp(src, 0, n_src - 1);
            taps[j].w[k] = keys_weight(s - src);
        }
    }
    return taps;
}

}  // namespace

GridD bicubic_resize(const GridD& scan, int out_rows, int out_cols) {
    if (out_rows < 1 || out_cols < 1)
        throw ConfigError("bicubic_resize: output shape must be positive");
    const auto row_taps = bicubic_taps(scan.rows(), out_rows);
    const auto col_taps = bicubic_taps(scan.cols(), out_cols);

    GridD mid(out_rows, scan.cols());
    for (int r = 0; r < out_rows; ++r) {
        const auto& t = row_taps[r];
        for (int c = 0; c < scan.cols(); ++c) {
            mid(r, c) = t.w[0] * scan(t.idx[0], c) + t.w[1] * scan(t.idx[1], c) +
                        t.w[2] * scan(t.idx[2], c) + t.w[3] * scan(t.idx[3], c);
        }
    }
    GridD out(out_rows, out_cols);
    for (int r = 0; r < out_rows; ++r) {
        for (int c = 0; c < out_cols; ++c) {
            const auto& t = col_taps[c];
            out(r, c) = t.w[0] * mid(r, t.idx[0]) + t.w[1] * mid(r, t.idx[1]) +
                        t.w[2] * mid(r, t.idx[2]) + t.w[3] * mid(r, t.idx[3]);
        }
    }
    return out;
}

GridU8 nearest_resize(const GridU8& labels, int out_rows, int out_cols) {
    if (out_rows < 1 || out_cols < 1)
        throw ConfigError("nearest_resize: output shape must be positive");
    GridU8 out(out_rows, out_cols);
    const double rr = static_cast<double>(labels.rows()) / out_rows;
    const double cr = static_cast<double>(labels.cols()) / out_cols;
    for (int r = 0; r < out_rows; ++r) {
        const int sr = std::clamp(
            static_cast<int>(std::llround((r + 0.5) * rr - 0.5)), 0, labels.rows() - 1);
        for (int c = 0; c < out_cols; ++c) {
            const int sc = std::clamp(
                static_cast<int>(std::llround((c + 0.5) * cr - 0.5)), 0, labels.cols() - 1);
            out(r, c) = labels(sr, sc);
        }
    }
    return out;
}

GridD normalize(const GridD& scan) {
    double peak = 0.0;
    for (size_t i = 0; i < scan.size(); ++i)
        peak = std::max(peak, std::abs(scan.data()[i]));
    if (peak == 0.0) throw ConfigError("normalize: degenerate-scan (all zero)");
    GridD out(scan.rows(), scan.cols());
    for (size_t i = 0; i < scan.size(); ++i) out.data()[i] = scan.data()[i] / peak;
    return out;
}

GridD augment_with_noise(const GridD& scan, const GridD& noise, double alpha) {
    if (!scan.same_shape(noise))
        throw ConfigError("augment_with_noise: scan and noise shapes differ");
    GridD mixed(scan.rows(), scan.cols());
    for (size_t i = 0; i < scan.size(); ++i)
        mixed.data()[i] = scan.data()[i] + alpha * noise.data()[i];
    return normalize(mixed);
}

GridD augment_with_noise(const GridD& scan, const NoiseLibrary& lib, uint64_t seed) {
    if (lib.entries.empty())
        throw ConfigError("augment_with_noise: noise library is empty");
    if (lib.scale_lo > lib.scale_hi || lib.scale_lo < 0)
        throw ConfigError("augment_with_noise: bad scale range");
    Rng rng(mix_seed(seed, 0x6e6f6973ULL));
    const auto& entry =
        lib.entries[static_cast<size_t>(rng.uniform_int(0, lib.entries.size() - 1))];
    const double alpha = rng.uniform(lib.scale_lo, lib.scale_hi);
    return augment_with_noise(scan, entry, alpha);
}

GridD preprocess(const GridD& scan, const PreprocessConfig& config) {
    if (config.dt <= 0) throw ConfigError("preprocess: dt must be positive");
    const double lo = config.band_lo_hz > 0 ? config.band_lo_hz : 0.25 * config.f0;
    const double hi = config.band_hi_hz > 0 ? config.band_hi_hz : 2.0 * config.f0;
    GridD work = static_correct(scan, config.static_threshold);
    work = dewow(work, config.f0, config.dt);
    if (config.remove_mean) work = remove_mean_trace(work);
    work = bandpass(work, lo, hi, config.dt, config.filter_order);
    work = bicubic_resize(work, config.out_rows, config.out_cols);
    return normalize(work);
}

}  // namespace gprseg
