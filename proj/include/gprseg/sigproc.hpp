#pragma once

#include <cstdint>
#include <vector>

#include "gprseg/common.hpp"

namespace gprseg {

// Radargrams are stored as float32 but processed in double; these convert at
// the boundary.
GridD grid_to_double(const GridF& g);
GridF grid_to_float(const GridD& g);

/// Aligns first breaks across traces. A trace's first break is the earliest
/// sample whose magnitude reaches `threshold` times the trace's peak
/// magnitude; every trace is shifted (zero fill) so its first break lands on
/// the median first-break row. An all-zero trace has no first break and is
/// rejected (dead-trace).
GridD static_correct(const GridD& scan, double threshold = 0.3);

/// Subtracts a centered running mean of width round(1/(f0*dt)) from each
/// trace; the window clips at the trace ends. A window covering the whole
/// trace degrades to subtracting the trace mean.
GridD dewow(const GridD& scan, double f0, double dt);

/// Subtracts the across-trace mean from every row.
GridD remove_mean_trace(const GridD& scan);

/// Zero-phase band-pass per trace: even-order Butterworth high-pass at
/// band_lo cascaded with a low-pass at band_hi, each applied forward and
/// reverse (filtfilt). Band must sit strictly inside (0, Nyquist).
GridD bandpass(const GridD& scan, double band_lo_hz, double band_hi_hz, double dt,
               int order = 4);

/// Separable bicubic resampling (Keys kernel, a = -0.5) with half-pixel
/// sample centers and clamped edges.
GridD bicubic_resize(const GridD& scan, int out_rows, int out_cols);

/// Nearest-neighbor resampling with half-pixel sample centers; used for
/// class-id maps where interpolation would invent labels.
GridU8 nearest_resize(const GridU8& labels, int out_rows, int out_cols);

/// Scales so the largest magnitude becomes 1. All-zero input is rejected
/// (degenerate-scan).
GridD normalize(const GridD& scan);

/// out = normalize(scan + alpha * noise); shapes must match.
GridD augment_with_noise(const GridD& scan, const GridD& noise, double alpha);

/// Background scans mixed into synthetic data during fine-tuning. Entries
/// must already be normalized and shaped like the scans they augment.
struct NoiseLibrary {
    std::vector<GridD> entries;
    double scale_lo = 0.05;
    double scale_hi = 0.3;
};

/// Draws an entry and a mixing amplitude from the seed, then mixes and
/// re-normalizes. An empty library is rejected.
GridD augment_with_noise(const GridD& scan, const NoiseLibrary& lib, uint64_t seed);

struct PreprocessConfig {
    double static_threshold = 0.3;
    double f0 = 600e6;      // Hz, dominant wavelet frequency
    double dt = 0.0;        // s, per-sample spacing of the input scan
    double band_lo_hz = 0;  // 0 derives 0.25 * f0
    double band_hi_hz = 0;  // 0 derives 2 * f0
    int filter_order = 4;
    int out_rows = 256;
    int out_cols = 128;
    bool remove_mean = true;  // off when preparing background-noise scans
};

/// Fixed chain: static_correct, dewow, remove_mean_trace, bandpass,
/// bicubic_resize, normalize.
GridD preprocess(const GridD& scan, const PreprocessConfig& config);

namespace detail {

/// One second-order section, direct form 2 transposed, plus the Butterworth
/// designs used by bandpass(). Exposed for the filter-response tests.
struct Biquad {
    double b0, b1, b2, a1, a2;
};
Biquad design_lowpass(double fc, double fs, double q);
Biquad design_highpass(double fc, double fs, double q);
std::vector<double> filtfilt(const std::vector<Biquad>& sections,
                             const std::vector<double>& x);

}  // namespace detail

}  // namespace gprseg
