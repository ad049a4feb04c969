#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gprseg {

// Physical constants (SI)
inline constexpr double kC0 = 299792458.0;            // vacuum light speed, m/s
inline constexpr double kMu0 = 1.25663706212e-6;      // vacuum permeability, H/m
inline constexpr double kEps0 = 8.8541878128e-12;     // vacuum permittivity, F/m
inline constexpr double kEta0 = 376.730313668;        // vacuum impedance, ohm
inline constexpr double kPi = 3.14159265358979323846;

// Error categories map onto CLI exit codes: ConfigError -> 2, IoError -> 3,
// InstabilityError -> 4, NonFiniteLossError -> 5. Data-dependent failures
// (dead traces, degenerate scans) are ConfigError subclasses by convention.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};
struct InstabilityError : std::runtime_error {
    explicit InstabilityError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NonFiniteLossError : std::runtime_error {
    explicit NonFiniteLossError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dense row-major H x W matrix.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    T* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
    const T* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool operator==(const Grid& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using GridF = Grid<float>;
using GridD = Grid<double>;
using GridU8 = Grid<uint8_t>;

// splitmix64: used to derive independent sub-seeds from a master seed so that
// per-sample / per-epoch streams stay reproducible without shared RNG state.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x515e1ULL));
}

/// Deterministic RNG wrapper. Distribution mappings are written out explicitly
/// because std::uniform_*_distribution output is not pinned by the standard.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Index draw proportional to non-negative weights.
    size_t weighted(const std::vector<double>& weights);

    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a 64-bit digest, hex-encoded. Detects any single-byte corruption.
uint64_t fnv1a64(const uint8_t* bytes, size_t n);
std::string fnv1a64_hex(const uint8_t* bytes, size_t n);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gprseg
