#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gprseg/manifest.hpp"

namespace gprseg {

/// Everything gen-dataset needs: scenario sampling ranges, solver settings,
/// and the preprocessing chain. A zero prep.dt is filled with the solver's
/// effective time step before anything runs.
struct DatasetConfig {
    GenerationConfig gen;
    SimConfig sim;
    PreprocessConfig prep;
    int count = 0;
    uint64_t seed = 0;
};

/// Generates `count` samples under `out_dir` and writes manifest.json.
/// Per sample: permittivity, conductivity, and label grids at interior
/// resolution, the raw B-scan, the preprocessed 256x128 scan, and the label
/// map resized to the network input. Samples whose files all exist already
/// are not re-simulated, so an interrupted run can be resumed with the same
/// arguments. `progress`, when set, is called after each sample.
RunManifest generate_dataset(const DatasetConfig& cfg, const std::string& out_dir,
                             const std::function<void(int, int)>& progress = {});

/// One training-ready sample held in memory.
struct LoadedSample {
    SampleRecord record;
    GridF scan;      // preprocessed, network input resolution
    GridU8 label256; // labels at network input resolution
    GridU8 labels;   // labels at interior resolution, for output-space scoring
};

/// Loads every sample of `split`, verifying each file against its manifest
/// checksum. Throws IoError on any mismatch or missing file.
std::vector<LoadedSample> load_split(const RunManifest& manifest,
                                     const std::string& dataset_dir,
                                     const std::string& split);

}  // namespace gprseg
