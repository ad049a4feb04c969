#include "gprseg/testbed.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gprseg/container.hpp"
#include "gprseg/fdtd.hpp"
#include "gprseg/material.hpp"
#include "gprseg/report.hpp"
#include "gprseg/sigproc.hpp"

namespace gprseg {

namespace fs = std::filesystem;

ScenarioDescriptor testbed_defect_scenario(const GenerationConfig& gen,
                                           uint64_t seed) {
    ScenarioDescriptor d;
    d.category = Category::kWetNoRebar;
    d.defect_set = {DefectKind::kVoid};
    d.water = true;
    d.seed = seed;
    VoidGeom v;
    v.center_x = gen.width() / 2.0;
    v.center_d = gen.depth() / 2.0;
    v.semi_x = 0.06;
    v.semi_d = 0.06;
    d.void_ = v;
    return d;
}

ScenarioDescriptor testbed_clean_scenario(uint64_t seed) {
    ScenarioDescriptor d;
    d.category = Category::kNoDefect;
    d.seed = seed;
    return d;
}

bool centroid_of_class(const GridU8& ids, uint8_t cls, double& row, double& col) {
    double sr = 0.0, sc = 0.0;
    size_t n = 0;
    for (int r = 0; r < ids.rows(); ++r)
        for (int c = 0; c < ids.cols(); ++c)
            if (ids(r, c) == cls) {
                sr += r;
                sc += c;
                ++n;
            }
    if (n == 0) return false;
    row = sr / static_cast<double>(n);
    col = sc / static_cast<double>(n);
    return true;
}

TestbedResult run_testbed(const TestbedConfig& cfg, const std::string& out_dir,
                          const std::string& base_checkpoint,
                          const std::string& manifest_path) {
    cfg.gen.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("testbed: cannot create " + out_dir);
    const fs::path dir(out_dir);

    PreprocessConfig prep = cfg.prep;
    if (prep.dt == 0.0) prep.dt = cfg.sim.effective_dt();
    if (prep.f0 == 0.0) prep.f0 = cfg.sim.f0;

    const ScenarioDescriptor x1 =
        testbed_defect_scenario(cfg.gen, mix_seed(cfg.seed, 1));
    const ScenarioDescriptor x2 = testbed_clean_scenario(mix_seed(cfg.seed, 2));
    const LiningModel m1 = rasterize(cfg.gen, x1);
    const LiningModel m2 = rasterize(cfg.gen, x2);

    const Bscan b1 = simulate_bscan(m1, cfg.sim);
    const Bscan b2 = simulate_bscan(m2, cfg.sim);

    const GridD scan1 = preprocess(grid_to_double(b1.data), prep);

    PreprocessConfig noise_prep = prep;
    noise_prep.remove_mean = false;  // keep the background structure
    NoiseLibrary lib;
    lib.entries.push_back(preprocess(grid_to_double(b2.data), noise_prep));

    write_grid((dir / "x1_bscan.gprt").string(), b1.data);
    write_grid((dir / "x2_bscan.gprt").string(), b2.data);
    write_grid((dir / "x1_scan.gprt").string(), grid_to_float(scan1));
    write_grid((dir / "x2_noise.gprt").string(), grid_to_float(lib.entries[0]));
    write_grid((dir / "x1_labels.gprt").string(), m1.labels);

    TestbedResult res;
    res.noise_entries = static_cast<int>(lib.entries.size());

    const GridU8 truth = output_truth_map(m1.labels, cfg.sim.cpml_cells);
    if (!centroid_of_class(truth, kWetVoid, res.true_row, res.true_col))
        throw ConfigError("testbed: the defect section carries no wet-void cells");
    write_heatmap_ppm((dir / "x1_truth.ppm").string(), truth);

    if (base_checkpoint.empty() || manifest_path.empty()) return res;

    const RunManifest manifest = load_manifest(manifest_path);
    const std::string dataset_dir = fs::path(manifest_path).parent_path().string();
    const auto train_set = load_split(manifest, dataset_dir, "train");
    const auto valid_set = load_split(manifest, dataset_dir, "valid");

    const TrainResult ft = finetune(base_checkpoint, train_set, valid_set, lib,
                                    cfg.finetune, (dir / "finetune").string());
    Checkpoint best = load_checkpoint(ft.best_dir);
    res.finetune_dir = ft.best_dir;

    const GridF scan1f = grid_to_float(scan1);
    const GridU8 in_map = predict_input_map(best.net, scan1f);
    const GridU8 out_map = nearest_resize(in_map, truth.rows(), truth.cols());

    res.predicted = true;
    for (int r = 0; r < out_map.rows(); ++r)
        for (int c = 0; c < out_map.cols(); ++c)
            if (out_map(r, c) == kWetVoid) ++res.pred_pixels;
    if (centroid_of_class(out_map, kWetVoid, res.pred_row, res.pred_col)) {
        res.centroid_error_m =
            cfg.gen.cell_size * std::hypot(res.pred_row - res.true_row,
                                           res.pred_col - res.true_col);
    } else {
        res.centroid_error_m = std::numeric_limits<double>::infinity();
    }

    write_heatmap_ppm((dir / "x1_pred.ppm").string(), out_map);
    write_overlay_ppm((dir / "x1_overlay.ppm").string(), scan1f, in_map);

    nlohmann::json j;
    j["noise_entries"] = res.noise_entries;
    j["true_centroid"] = {res.true_row, res.true_col};
    j["pred_centroid"] = {res.pred_row, res.pred_col};
    j["pred_pixels"] = res.pred_pixels;
    j["centroid_error_m"] = res.centroid_error_m;
    j["finetune_dir"] = res.finetune_dir;
    std::ofstream out(dir / "result.json");
    if (!out) throw IoError("testbed: cannot write result.json");
    out << j.dump(2) << "\n";
    return res;
}

}  // namespace gprseg
