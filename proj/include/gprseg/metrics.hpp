#pragma once

#include <array>
#include <cstdint>

#include "gprseg/common.hpp"

namespace gprseg {

/// 9x9 tally of scored pixels: rows index the ground-truth class, columns
/// the predicted class.
struct ConfusionMatrix {
    static constexpr int kClasses = 9;
    std::array<int64_t, kClasses * kClasses> counts{};

    int64_t& at(int truth, int pred) { return counts[truth * kClasses + pred]; }
    int64_t at(int truth, int pred) const { return counts[truth * kClasses + pred]; }

    int64_t total() const {
        int64_t t = 0;
        for (int64_t v : counts) t += v;
        return t;
    }

    void add(const ConfusionMatrix& other) {
        for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    }
};

/// Tallies every pixel of the pair into cm. Shapes must match.
void accumulate_confusion(ConfusionMatrix& cm, const GridU8& pred, const GridU8& truth);

/// Tallies only the half-open rectangle [row_lo, row_hi) x [col_lo, col_hi),
/// used to exclude the absorbing-boundary padding ring from scoring.
void accumulate_confusion(ConfusionMatrix& cm, const GridU8& pred, const GridU8& truth,
                          int row_lo, int row_hi, int col_lo, int col_hi);

/// Aggregate segmentation scores. Per-class entries are NaN when their
/// denominator is zero; such classes are excluded from the means.
struct Metrics {
    std::array<double, ConfusionMatrix::kClasses> pa;
    std::array<double, ConfusionMatrix::kClasses> iou;
    std::array<double, ConfusionMatrix::kClasses> precision;
    std::array<double, ConfusionMatrix::kClasses> recall;
    std::array<double, ConfusionMatrix::kClasses> f_measure;
    double mpa = 0.0;
    double miou = 0.0;
    double fwiou = 0.0;
};

/// Derives all metrics from the matrix. Throws on an empty matrix.
Metrics compute_metrics(const ConfusionMatrix& cm);

}  // namespace gprseg
