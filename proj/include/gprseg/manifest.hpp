#pragma once

#include <string>
#include <vector>

#include "gprseg/fdtd.hpp"
#include "gprseg/model_gen.hpp"
#include "gprseg/sigproc.hpp"

namespace gprseg {

/// Files, provenance, and split assignment for one generated sample. Paths
/// are relative to the dataset directory; checksums are FNV-1a hex digests
/// aligned with `paths`.
struct SampleRecord {
    int index = 0;
    uint64_t seed = 0;
    std::string split;  // "train" | "valid" | "test"

    // scenario summary used by the per-category report
    int category = 0;
    std::string combo;  // defect combination name, "" for no-defect
    bool water = false;
    bool rebar = false;

    std::vector<std::string> paths;
    std::vector<std::string> checksums;

    std::string path_ending(const std::string& suffix) const;
};

/// Dataset description: the exact configuration that generated it plus one
/// record per sample. The split follows the 10:1:1 ratio by sample index.
struct RunManifest {
    std::string dataset_id;
    std::string created_utc;
    GenerationConfig gen;
    SimConfig sim;
    PreprocessConfig prep;
    std::vector<SampleRecord> samples;

    std::vector<const SampleRecord*> split_samples(const std::string& split) const;
};

/// Split assignment for sample `index`: positions 0..9 of every block of 12
/// train, position 10 validation, position 11 test.
std::string split_of(int index);

void save_manifest(const std::string& path, const RunManifest& manifest);
RunManifest load_manifest(const std::string& path);

}  // namespace gprseg
