#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gprseg/dataset.hpp"
#include "gprseg/metrics.hpp"
#include "gprseg/train.hpp"

namespace gprseg {

/// Fixed palette, one RGB color per class id, documented in every report
/// header so images and tables stay aligned across runs.
const std::array<std::array<uint8_t, 3>, kNumClasses>& class_palette();

/// Binary P6 image of a class-id map in the palette colors.
void write_heatmap_ppm(const std::string& path, const GridU8& ids);

/// Class colors blended over the grayscale scan. Class 0 pixels keep the
/// scan so the defect prediction reads as an overlay. Shapes must match.
void write_overlay_ppm(const std::string& path, const GridF& scan,
                       const GridU8& ids, double alpha = 0.6);

/// Places the interior label grid at the padding offset inside a concrete
/// frame of the output-map extents (90 x 220 for the 70 x 200 interior).
GridU8 output_truth_map(const GridU8& interior_labels, int pad = 10);

struct CategoryRow {
    std::string combo;  // defect combination name, "none" for no-defect
    bool water = false;
    bool rebar = false;
    int n_samples = 0;
    ConfusionMatrix cm;
};

/// Everything eval derives from one checkpoint and one split. The tables
/// written from it are pure functions of the stored confusion matrices.
struct EvalReport {
    std::string method;
    std::string split;
    int n_samples = 0;
    ConfusionMatrix overall;
    std::vector<CategoryRow> categories;
};

/// Predicts every sample of the split, scores the interior rectangle of the
/// output-resolution maps against the ground truth, and groups the counts
/// overall and by defect-combination x water x rebar.
EvalReport evaluate_split_report(Network& net, const std::string& method,
                                 const std::string& split,
                                 const std::vector<LoadedSample>& samples,
                                 int pad = 10);

/// Writes report_summary.csv, report_classes.csv, report_categories.csv,
/// and report_confusion.csv into `dir` (created if needed).
void write_report(const std::string& dir, const EvalReport& report);

/// Parses report_confusion.csv back into per-group matrices, so report
/// numbers can be recomputed from the stored counts alone.
std::vector<std::pair<std::string, ConfusionMatrix>> read_confusion_csv(
    const std::string& path);

/// Prediction and truth heatmaps for the first `max_count` samples of the
/// split, at the output-map resolution.
void write_split_heatmaps(const std::string& dir, Network& net,
                          const std::vector<LoadedSample>& samples,
                          int max_count = 8, int pad = 10);

}  // namespace gprseg
