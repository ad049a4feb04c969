#include "gprseg/manifest.hpp"

#include <fstream>

#include "config_json.hpp"

namespace gprseg {

using nlohmann::json;

std::string SampleRecord::path_ending(const std::string& suffix) const {
    for (const auto& p : paths)
        if (p.size() >= suffix.size() &&
            p.compare(p.size() - suffix.size(), suffix.size(), suffix) == 0)
            return p;
    throw ConfigError("manifest: sample " + std::to_string(index) +
                      " has no file ending in " + suffix);
}

std::vector<const SampleRecord*> RunManifest::split_samples(
    const std::string& split) const {
    std::vector<const SampleRecord*> out;
    for (const auto& s : samples)
        if (s.split == split) out.push_back(&s);
    return out;
}

std::string split_of(int index) {
    const int pos = index % 12;
    if (pos < 10) return "train";
    return pos == 10 ? "valid" : "test";
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
    json j;
    j["dataset_id"] = manifest.dataset_id;
    j["created_utc"] = manifest.created_utc;
    j["generation"] = manifest.gen;
    j["simulation"] = manifest.sim;
    j["preprocess"] = manifest.prep;
    j["samples"] = manifest.samples;
    std::ofstream out(path);
    if (!out) throw IoError("manifest: cannot write " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("manifest: write failed for " + path);
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("manifest: cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("manifest: invalid JSON in " + path + ": " + e.what());
    }
    RunManifest m;
    try {
        m.dataset_id = j.at("dataset_id").get<std::string>();
        m.created_utc = j.value("created_utc", std::string());
        m.gen = j.at("generation").get<GenerationConfig>();
        m.sim = j.at("simulation").get<SimConfig>();
        m.prep = j.at("preprocess").get<PreprocessConfig>();
        m.samples = j.at("samples").get<std::vector<SampleRecord>>();
    } catch (const json::exception& e) {
        throw ConfigError("manifest: missing or malformed field in " + path + ": " +
                          e.what());
    }
    return m;
}

}  // namespace gprseg
