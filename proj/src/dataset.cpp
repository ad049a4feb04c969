#include "gprseg/dataset.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>

#include "gprseg/container.hpp"

namespace gprseg {

namespace fs = std::filesystem;

namespace {

std::string sample_stem(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%06d", index);
    return buf;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

RunManifest generate_dataset(const DatasetConfig& cfg, const std::string& out_dir,
                             const std::function<void(int, int)>& progress) {
    if (cfg.count < 0) throw ConfigError("gen-dataset: count must be >= 0");
    cfg.gen.validate();

    DatasetConfig c = cfg;
    if (c.prep.dt == 0.0) c.prep.dt = c.sim.effective_dt();
    if (c.prep.f0 == 0.0) c.prep.f0 = c.sim.f0;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("gen-dataset: cannot create " + out_dir);

    RunManifest manifest;
    manifest.dataset_id =
        "ds-seed" + std::to_string(c.seed) + "-n" + std::to_string(c.count);
    manifest.created_utc = utc_now();
    manifest.gen = c.gen;
    manifest.sim = c.sim;
    manifest.prep = c.prep;

    const uint64_t stream = mix_seed(c.seed, 0x7363656eULL);
    for (int i = 0; i < c.count; ++i) {
        const uint64_t sample_seed = mix_seed(stream, static_cast<uint64_t>(i));
        const std::string stem = sample_stem(i);

        SampleRecord rec;
        rec.index = i;
        rec.seed = sample_seed;
        rec.split = split_of(i);
        rec.paths = {stem + "_eps.gprt",  stem + "_sigma.gprt",
                     stem + "_labels.gprt", stem + "_bscan.gprt",
                     stem + "_scan.gprt", stem + "_label256.gprt"};

        const ScenarioDescriptor desc = sample_scenario(c.gen, sample_seed);
        rec.category = static_cast<int>(desc.category);
        rec.combo = desc.defect_set.empty() ? "" : defect_combo_name(desc.defect_set);
        rec.water = desc.water;
        rec.rebar = desc.has_rebar_row;

        bool all_present = true;
        for (const auto& p : rec.paths)
            if (!fs::exists(fs::path(out_dir) / p)) {
                all_present = false;
                break;
            }

        if (!all_present) {
            const LiningModel interior = rasterize(c.gen, desc);
            Bscan bscan;
            try {
                bscan = simulate_bscan(interior, c.sim);
            } catch (const InstabilityError& e) {
                throw InstabilityError("sample " + stem + ": " + e.what());
            }
            const GridD scan = preprocess(grid_to_double(bscan.data), c.prep);
            const GridU8 label256 =
                nearest_resize(interior.labels, c.prep.out_rows, c.prep.out_cols);

            const fs::path dir(out_dir);
            write_grid((dir / rec.paths[0]).string(), interior.eps);
            write_grid((dir / rec.paths[1]).string(), interior.sigma);
            write_grid((dir / rec.paths[2]).string(), interior.labels);
            write_grid((dir / rec.paths[3]).string(), bscan.data);
            write_grid((dir / rec.paths[4]).string(), grid_to_float(scan));
            write_grid((dir / rec.paths[5]).string(), label256);
        }

        for (const auto& p : rec.paths)
            rec.checksums.push_back(file_checksum((fs::path(out_dir) / p).string()));
        manifest.samples.push_back(std::move(rec));
        if (progress) progress(i + 1, c.count);
    }

    save_manifest((fs::path(out_dir) / "manifest.json").string(), manifest);
    return manifest;
}

std::vector<LoadedSample> load_split(const RunManifest& manifest,
                                     const std::string& dataset_dir,
                                     const std::string& split) {
    std::vector<LoadedSample> out;
    for (const SampleRecord* rec : manifest.split_samples(split)) {
        for (size_t k = 0; k < rec->paths.size(); ++k) {
            const std::string full =
                (fs::path(dataset_dir) / rec->paths[k]).string();
            const std::string sum = file_checksum(full);
            if (k < rec->checksums.size() && sum != rec->checksums[k])
                throw IoError("dataset: checksum mismatch for " + full);
        }
        LoadedSample s;
        s.record = *rec;
        s.scan = read_grid_f(
            (fs::path(dataset_dir) / rec->path_ending("_scan.gprt")).string());
        s.label256 = read_grid_u8(
            (fs::path(dataset_dir) / rec->path_ending("_label256.gprt")).string());
        s.labels = read_grid_u8(
            (fs::path(dataset_dir) / rec->path_ending("_labels.gprt")).string());
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace gprseg
