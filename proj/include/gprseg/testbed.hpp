#pragma once

#include <string>

#include "gprseg/dataset.hpp"
#include "gprseg/model_gen.hpp"
#include "gprseg/train.hpp"

namespace gprseg {

/// Simulated replica of the physical validation setup: a 2.0 m x 0.7 m
/// concrete section holding one water-filled circular inclusion of 0.12 m
/// diameter (scan line X1), plus the defect-free sideline (X2) whose scan
/// populates the background-noise library used for fine-tuning.
struct TestbedConfig {
    GenerationConfig gen;
    SimConfig sim;
    PreprocessConfig prep;
    uint64_t seed = 0x74657374;
    TrainConfig finetune = default_finetune();

    static TrainConfig default_finetune() {
        TrainConfig t;
        t.epochs = 40;
        return t;
    }
};

/// The wet-void section scanned as line X1: inclusion centered laterally,
/// at half the section depth.
ScenarioDescriptor testbed_defect_scenario(const GenerationConfig& gen,
                                           uint64_t seed);

/// The defect-free sideline X2, drawn from the same material statistics.
ScenarioDescriptor testbed_clean_scenario(uint64_t seed);

struct TestbedResult {
    int noise_entries = 0;

    // Wet-void centroids in output-map pixel coordinates, and their
    // distance converted through the cell size.
    double true_row = 0.0;
    double true_col = 0.0;
    double pred_row = 0.0;
    double pred_col = 0.0;
    int pred_pixels = 0;
    double centroid_error_m = 0.0;

    bool predicted = false;  // finetune + predict stages ran
    std::string finetune_dir;
};

/// Centroid of the pixels carrying `cls`; returns false when none do.
bool centroid_of_class(const GridU8& ids, uint8_t cls, double& row, double& col);

/// Builds and simulates both sections, writes their scans and the noise
/// library input under out_dir, and, when a base checkpoint and dataset are
/// given, fine-tunes with noise augmentation and predicts the defect
/// section, emitting prediction/truth heatmaps and the scan overlay.
TestbedResult run_testbed(const TestbedConfig& cfg, const std::string& out_dir,
                          const std::string& base_checkpoint = "",
                          const std::string& manifest_path = "");

}  // namespace gprseg
