#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gprseg/cli.hpp"
#include "gprseg/container.hpp"
#include "gprseg/dataset.hpp"
#include "gprseg/material.hpp"
#include "gprseg/report.hpp"
#include "gprseg/testbed.hpp"
#include "gprseg/train.hpp"

using namespace gprseg;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ArchConfig tiny_arch() {
    ArchConfig a;
    a.encoder_blocks = {4, 8};
    a.convs_per_block = 1;
    a.input_rows = 16;
    a.input_cols = 8;
    a.dropout_p = 0.2;
    return a;
}

LoadedSample make_sample(uint64_t seed, int rows = 16, int cols = 8) {
    LoadedSample s;
    s.record.index = static_cast<int>(seed);
    s.record.seed = seed;
    s.record.split = "train";
    s.record.category = static_cast<int>(seed % 5);
    s.record.combo = seed % 2 ? "crack" : "";
    s.record.water = seed % 3 == 0;
    s.record.rebar = seed % 2 == 0;
    Rng rng(mix_seed(seed, 0x74657374ULL));
    s.scan = GridF(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            s.scan(r, c) = static_cast<float>(rng.uniform(-1.0, 1.0));
    s.label256 = GridU8(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            s.label256(r, c) = static_cast<uint8_t>(rng.uniform_int(0, 8));
    s.labels = GridU8(70, 200);
    for (int r = 0; r < 70; ++r)
        for (int c = 0; c < 200; ++c)
            s.labels(r, c) = static_cast<uint8_t>(rng.uniform_int(0, 8));
    return s;
}

std::vector<LoadedSample> make_samples(int n, uint64_t seed0) {
    std::vector<LoadedSample> out;
    for (int i = 0; i < n; ++i) out.push_back(make_sample(seed0 + i));
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void require_same_files(const fs::path& a, const fs::path& b) {
    size_t n = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const fs::path other = b / e.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(file_checksum(e.path().string()) == file_checksum(other.string()));
        ++n;
    }
    CHECK(n > 0);
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("gprseg");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

// === run manifest ===

TEST_CASE("manifest JSON round trip preserves configs and samples") {
    RunManifest m;
    m.dataset_id = "ds-test";
    m.created_utc = "2024-05-01T00:00:00Z";
    m.gen.interior_rows = 35;
    m.gen.rock_prob = 0.25;
    m.sim.n_steps = 123;
    m.sim.pec_mode = true;
    m.prep.out_rows = 64;
    m.prep.remove_mean = false;
    for (int i = 0; i < 3; ++i) {
        SampleRecord r;
        r.index = i;
        r.seed = 1000 + static_cast<uint64_t>(i);
        r.split = split_of(i);
        r.category = i;
        r.combo = i == 2 ? "crack+void" : "";
        r.water = i == 1;
        r.rebar = i == 2;
        r.paths = {"s_eps.gprt", "s_scan.gprt"};
        r.checksums = {"aa", "bb"};
        m.samples.push_back(r);
    }
    const fs::path dir = temp_dir("gprseg_manifest_rt");
    save_manifest((dir / "manifest.json").string(), m);
    const RunManifest back = load_manifest((dir / "manifest.json").string());
    CHECK(back.dataset_id == m.dataset_id);
    CHECK(back.created_utc == m.created_utc);
    CHECK(back.gen.interior_rows == 35);
    CHECK(back.gen.rock_prob == doctest::Approx(0.25));
    CHECK(back.sim.n_steps == 123);
    CHECK(back.sim.pec_mode);
    CHECK(back.prep.out_rows == 64);
    CHECK_FALSE(back.prep.remove_mean);
    REQUIRE(back.samples.size() == 3);
    CHECK(back.samples[2].combo == "crack+void");
    CHECK(back.samples[2].rebar);
    CHECK(back.samples[1].water);
    CHECK(back.samples[0].checksums == std::vector<std::string>{"aa", "bb"});
    CHECK(back.split_samples("train").size() == 3);
}

TEST_CASE("split assignment follows the 10:1:1 pattern") {
    int train = 0, valid = 0, test = 0;
    for (int i = 0; i < 120; ++i) {
        const std::string s = split_of(i);
        if (s == "train") ++train;
        if (s == "valid") ++valid;
        if (s == "test") ++test;
    }
    CHECK(train == 100);
    CHECK(valid == 10);
    CHECK(test == 10);
    CHECK(split_of(9) == "train");
    CHECK(split_of(10) == "valid");
    CHECK(split_of(11) == "test");
    CHECK(split_of(12) == "train");
}

TEST_CASE("manifest loader distinguishes bad JSON from missing fields") {
    const fs::path dir = temp_dir("gprseg_manifest_bad");
    CHECK_THROWS_AS(load_manifest((dir / "absent.json").string()), IoError);
    {
        std::ofstream out(dir / "broken.json");
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_manifest((dir / "broken.json").string()), IoError);
    {
        std::ofstream out(dir / "partial.json");
        out << "{\"dataset_id\": \"x\"}";
    }
    CHECK_THROWS_AS(load_manifest((dir / "partial.json").string()), ConfigError);
}

TEST_CASE("path_ending locates suffixes and rejects unknown ones") {
    SampleRecord r;
    r.paths = {"s000007_eps.gprt", "s000007_scan.gprt"};
    CHECK(r.path_ending("_scan.gprt") == "s000007_scan.gprt");
    CHECK_THROWS_AS(r.path_ending("_bscan.gprt"), ConfigError);
}

// === checkpoints ===

TEST_CASE("checkpoint save/load restores every tensor bitwise") {
    Network net(tiny_arch(), 3);
    auto params = net.named_parameters();
    Rng rng(99);
    for (auto& [name, buf] : net.named_buffers())
        for (auto& v : *buf) v = static_cast<float>(rng.uniform(0.5, 2.0));
    AdamState<float> adam;
    adam.t = 7;
    for (auto& [name, t] : params) {
        adam.m.emplace_back(t->size());
        adam.v.emplace_back(t->size());
        for (auto& v : adam.m.back()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
        for (auto& v : adam.v.back()) v = static_cast<float>(rng.uniform(0.0, 1.0));
    }
    CheckpointMeta meta;
    meta.arch = net.arch();
    meta.loss = LossKind::kCeOnly;
    meta.seed = 3;
    meta.epoch = 5;
    meta.best_epoch = 4;
    meta.best_valid_miou = 0.75;

    const fs::path dir = temp_dir("gprseg_ckpt_rt");
    save_checkpoint(dir.string(), net, adam, meta);
    Checkpoint back = load_checkpoint(dir.string());

    CHECK(back.meta.loss == LossKind::kCeOnly);
    CHECK(back.meta.seed == 3);
    CHECK(back.meta.epoch == 5);
    CHECK(back.meta.best_epoch == 4);
    CHECK(back.meta.best_valid_miou == doctest::Approx(0.75));
    CHECK(back.meta.arch.encoder_blocks == net.arch().encoder_blocks);
    CHECK(back.meta.arch.mode == net.arch().mode);

    auto back_params = back.net.named_parameters();
    REQUIRE(back_params.size() == params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        CHECK(back_params[i].first == params[i].first);
        CHECK(*back_params[i].second->data == *params[i].second->data);
    }
    auto bufs = net.named_buffers();
    auto back_bufs = back.net.named_buffers();
    REQUIRE(back_bufs.size() == bufs.size());
    for (size_t i = 0; i < bufs.size(); ++i)
        CHECK(*back_bufs[i].second == *bufs[i].second);
    CHECK(back.adam.t == 7);
    REQUIRE(back.adam.m.size() == adam.m.size());
    for (size_t i = 0; i < adam.m.size(); ++i) {
        CHECK(back.adam.m[i] == adam.m[i]);
        CHECK(back.adam.v[i] == adam.v[i]);
    }
}

TEST_CASE("checkpoint loader rejects a tensor of the wrong size") {
    Network net(tiny_arch(), 3);
    AdamState<float> adam;
    CheckpointMeta meta;
    meta.arch = net.arch();
    const fs::path dir = temp_dir("gprseg_ckpt_bad");
    save_checkpoint(dir.string(), net, adam, meta);
    write_blob((dir / "p_head_b.gprt").string(),
               blob_from_floats({1.0f, 2.0f}, {2}));
    CHECK_THROWS_AS(load_checkpoint(dir.string()), ConfigError);
}

// === training loop ===

TEST_CASE("history records one row per epoch with both loss components") {
    const auto train_set = make_samples(6, 100);
    const auto valid_set = make_samples(2, 200);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.lr = 1e-3;
    cfg.epochs = 2;
    cfg.seed = 9;
    const fs::path dir = temp_dir("gprseg_train_hist");
    const TrainResult res =
        train(train_set, valid_set, tiny_arch(), cfg, dir.string());
    REQUIRE(res.history.size() == 2);
    CHECK(res.history[0].epoch == 1);
    CHECK(res.history[1].epoch == 2);
    for (const auto& row : res.history) {
        CHECK(row.train_ce > 0.0);
        CHECK(row.train_lovasz > 0.0);
        CHECK(row.valid_ce > 0.0);
        CHECK(row.valid_lovasz > 0.0);
        CHECK(row.valid_miou >= 0.0);
    }
    std::ifstream in(dir / "history.csv");
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] ==
          "epoch,train_ce,train_lovasz,valid_ce,valid_lovasz,valid_miou");
    CHECK(lines[1].substr(0, 2) == "1,");
    CHECK(fs::exists(dir / "last" / "meta.json"));
    CHECK(fs::exists(dir / "best" / "meta.json"));
}

TEST_CASE("interrupted training resumes bit for bit") {
    const auto train_set = make_samples(8, 300);
    const auto valid_set = make_samples(2, 400);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.lr = 1e-3;
    cfg.seed = 5;

    const fs::path dir_a = temp_dir("gprseg_train_once");
    cfg.epochs = 4;
    train(train_set, valid_set, tiny_arch(), cfg, dir_a.string());

    const fs::path dir_b = temp_dir("gprseg_train_split");
    cfg.epochs = 2;
    train(train_set, valid_set, tiny_arch(), cfg, dir_b.string());
    cfg.epochs = 4;
    const TrainResult resumed =
        train(train_set, valid_set, tiny_arch(), cfg, dir_b.string());
    CHECK(resumed.history.size() == 2);
    CHECK(resumed.history[0].epoch == 3);

    CHECK(slurp(dir_a / "history.csv") == slurp(dir_b / "history.csv"));
    require_same_files(dir_a / "last", dir_b / "last");
}

TEST_CASE("training rejects a request below the completed epoch count") {
    const auto train_set = make_samples(4, 500);
    const auto valid_set = make_samples(2, 600);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    const fs::path dir = temp_dir("gprseg_train_shrunk");
    train(train_set, valid_set, tiny_arch(), cfg, dir.string());
    cfg.epochs = 1;
    CHECK_THROWS_AS(train(train_set, valid_set, tiny_arch(), cfg, dir.string()),
                    ConfigError);
}

TEST_CASE("loss kinds share the first epoch and then diverge") {
    const auto train_set = make_samples(4, 700);
    const auto valid_set = make_samples(2, 800);
    TrainConfig cfg;
    cfg.batch_size = 8;  // one batch per epoch
    cfg.lr = 1e-3;
    cfg.epochs = 2;
    cfg.seed = 21;

    cfg.loss = LossKind::kCeOnly;
    const TrainResult ce =
        train(train_set, valid_set, tiny_arch(), cfg,
              temp_dir("gprseg_train_ce").string());
    cfg.loss = LossKind::kCePlusLovasz;
    const TrainResult both =
        train(train_set, valid_set, tiny_arch(), cfg,
              temp_dir("gprseg_train_both").string());

    CHECK(ce.history[0].train_ce == both.history[0].train_ce);
    CHECK(ce.history[0].train_lovasz == both.history[0].train_lovasz);
    CHECK(ce.history[1].train_ce != both.history[1].train_ce);
}

TEST_CASE("training rejects empty splits") {
    const auto some = make_samples(2, 900);
    const std::vector<LoadedSample> none;
    TrainConfig cfg;
    cfg.epochs = 1;
    const fs::path dir = temp_dir("gprseg_train_empty");
    CHECK_THROWS_AS(train(none, some, tiny_arch(), cfg, dir.string()),
                    ConfigError);
    CHECK_THROWS_AS(train(some, none, tiny_arch(), cfg, dir.string()),
                    ConfigError);
}

// === finetuning ===

TEST_CASE("finetune with zero epochs re-emits the base checkpoint") {
    const auto train_set = make_samples(4, 1000);
    const auto valid_set = make_samples(2, 1100);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 1;
    cfg.seed = 2;
    const fs::path base_dir = temp_dir("gprseg_ft_base");
    train(train_set, valid_set, tiny_arch(), cfg, base_dir.string());

    NoiseLibrary lib;
    lib.entries.emplace_back(16, 8, 0.1);
    cfg.epochs = 0;
    const fs::path out = temp_dir("gprseg_ft_zero");
    const TrainResult res = finetune((base_dir / "last").string(), train_set,
                                     valid_set, lib, cfg, out.string());
    require_same_files(base_dir / "last", out / "best");
    require_same_files(base_dir / "last", out / "last");
    CHECK(res.history.empty());
}

TEST_CASE("finetune restarts the optimizer statistics") {
    const auto train_set = make_samples(8, 1200);
    const auto valid_set = make_samples(2, 1300);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.lr = 1e-3;
    cfg.epochs = 3;
    cfg.seed = 12;
    const fs::path base_dir = temp_dir("gprseg_ft_base2");
    train(train_set, valid_set, tiny_arch(), cfg, base_dir.string());
    {
        const nlohmann::json meta = nlohmann::json::parse(
            slurp(base_dir / "last" / "meta.json"));
        CHECK(meta.at("adam_t").get<int64_t>() == 6);  // 2 steps x 3 epochs
    }

    NoiseLibrary lib;
    lib.entries.emplace_back(16, 8, 0.1);
    for (int r = 0; r < 16; ++r) lib.entries[0](r, r % 8) = 0.9;
    cfg.epochs = 1;
    const fs::path out = temp_dir("gprseg_ft_one");
    const TrainResult res = finetune((base_dir / "last").string(), train_set,
                                     valid_set, lib, cfg, out.string());
    REQUIRE(res.history.size() == 1);
    const nlohmann::json meta =
        nlohmann::json::parse(slurp(out / "last" / "meta.json"));
    CHECK(meta.at("adam_t").get<int64_t>() == 2);  // fresh moments, one epoch
}

// === prediction ===

TEST_CASE("predict maps honor the contract shapes and are deterministic") {
    Network net(tiny_arch(), 17);
    const LoadedSample s = make_sample(42);
    const GridU8 a = predict_input_map(net, s.scan);
    const GridU8 b = predict_input_map(net, s.scan);
    CHECK(a.rows() == 16);
    CHECK(a.cols() == 8);
    CHECK(a == b);
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) CHECK(a(r, c) < kNumClasses);
    const GridU8 out = predict_output_map(net, s.scan);
    CHECK(out.rows() == 90);
    CHECK(out.cols() == 220);
    GridF wrong(8, 8);
    CHECK_THROWS_AS(predict_input_map(net, wrong), ConfigError);
}

// === reports ===

TEST_CASE("output truth map frames the interior with concrete") {
    GridU8 interior(3, 4);
    interior.fill(5);
    interior(1, 2) = 7;
    const GridU8 out = output_truth_map(interior, 2);
    CHECK(out.rows() == 7);
    CHECK(out.cols() == 8);
    CHECK(out(0, 0) == 0);
    CHECK(out(6, 7) == 0);
    CHECK(out(1, 1) == 0);
    CHECK(out(2, 2) == 5);
    CHECK(out(3, 4) == 7);
}

TEST_CASE("report tables recompute from the stored confusion counts") {
    Network net(tiny_arch(), 23);
    auto samples = make_samples(3, 1400);
    samples[1].record.combo = "void";
    samples[1].record.water = true;
    const EvalReport rep =
        evaluate_split_report(net, "index-decoder+ce+lovasz", "test", samples);
    CHECK(rep.n_samples == 3);
    CHECK(rep.overall.total() == 3 * 70 * 200);

    int64_t category_total = 0;
    ConfusionMatrix merged;
    for (const auto& row : rep.categories) {
        category_total += row.cm.total();
        merged.add(row.cm);
    }
    CHECK(category_total == rep.overall.total());
    CHECK(merged.counts == rep.overall.counts);

    const fs::path dir = temp_dir("gprseg_report");
    write_report(dir.string(), rep);
    CHECK(fs::exists(dir / "report_summary.csv"));
    CHECK(fs::exists(dir / "report_classes.csv"));
    CHECK(fs::exists(dir / "report_categories.csv"));

    const auto groups = read_confusion_csv((dir / "report_confusion.csv").string());
    REQUIRE(!groups.empty());
    CHECK(groups[0].first == "overall");
    CHECK(groups[0].second.counts == rep.overall.counts);
    CHECK(compute_metrics(groups[0].second).miou ==
          compute_metrics(rep.overall).miou);
    REQUIRE(groups.size() == 1 + rep.categories.size());
    for (size_t i = 0; i < rep.categories.size(); ++i)
        CHECK(groups[i + 1].second.counts == rep.categories[i].cm.counts);
}

TEST_CASE("heatmaps encode the palette colors") {
    GridU8 ids(1, kNumClasses);
    for (int c = 0; c < kNumClasses; ++c) ids(0, c) = static_cast<uint8_t>(c);
    const fs::path dir = temp_dir("gprseg_heatmap");
    const std::string path = (dir / "map.ppm").string();
    write_heatmap_ppm(path, ids);
    const std::string bytes = slurp(path);
    const std::string header = "P6\n9 1\n255\n";
    REQUIRE(bytes.size() == header.size() + 27);
    CHECK(bytes.substr(0, header.size()) == header);
    for (int c = 0; c < kNumClasses; ++c) {
        const auto& p = class_palette()[static_cast<size_t>(c)];
        for (int k = 0; k < 3; ++k)
            CHECK(static_cast<uint8_t>(bytes[header.size() + 3 * c + k]) == p[k]);
    }
    GridU8 bad(1, 1);
    bad(0, 0) = 9;
    CHECK_THROWS_AS(write_heatmap_ppm((dir / "bad.ppm").string(), bad),
                    ConfigError);
    GridF scan(2, 2);
    CHECK_THROWS_AS(write_overlay_ppm((dir / "bad2.ppm").string(), scan, ids),
                    ConfigError);
}

// === testbed scenarios ===

TEST_CASE("testbed defect section is a centered water-filled inclusion") {
    GenerationConfig gen;
    const ScenarioDescriptor d = testbed_defect_scenario(gen, 77);
    CHECK(d.category == Category::kWetNoRebar);
    CHECK(d.water);
    REQUIRE(d.void_.has_value());
    CHECK(d.void_->center_x == doctest::Approx(1.0));
    CHECK(d.void_->center_d == doctest::Approx(0.35));
    CHECK(d.void_->semi_x == doctest::Approx(0.06));
    CHECK(d.void_->semi_d == doctest::Approx(0.06));
    CHECK_FALSE(d.has_rock_layer);
    CHECK_FALSE(d.has_rebar_row);

    const LiningModel m = rasterize(gen, d);
    double row = 0.0, col = 0.0;
    REQUIRE(centroid_of_class(m.labels, kWetVoid, row, col));
    CHECK(std::abs(row - 34.5) <= 1.0);
    CHECK(std::abs(col - 99.5) <= 1.0);

    const ScenarioDescriptor clean = testbed_clean_scenario(78);
    const LiningModel mc = rasterize(gen, clean);
    for (int r = 0; r < mc.labels.rows(); ++r)
        for (int c = 0; c < mc.labels.cols(); ++c)
            CHECK(mc.labels(r, c) == kConcrete);
}

TEST_CASE("centroid_of_class reports absence") {
    GridU8 ids(4, 4);
    ids.fill(0);
    double row = 0.0, col = 0.0;
    CHECK_FALSE(centroid_of_class(ids, kWetVoid, row, col));
    ids(1, 1) = kWetVoid;
    ids(3, 3) = kWetVoid;
    REQUIRE(centroid_of_class(ids, kWetVoid, row, col));
    CHECK(row == doctest::Approx(2.0));
    CHECK(col == doctest::Approx(2.0));
}

// === command line ===

TEST_CASE("cli maps stage failures to the documented exit codes") {
    CHECK(run({}) == 2);
    CHECK(run({"--bogus"}) == 2);
    CHECK(run({"eval", "--checkpoint", "/nonexistent/ckpt", "--manifest",
               "/nonexistent/m.json", "--split", "bananas", "--report",
               "/tmp/r"}) == 2);
    CHECK(run({"eval", "--checkpoint", "/nonexistent/ckpt", "--manifest",
               "/nonexistent/m.json", "--split", "test", "--report",
               "/tmp/r"}) == 3);
    const fs::path dir = temp_dir("gprseg_cli_codes");
    CHECK(run({"gen-dataset", "--count", "-1", "--out",
               (dir / "ds").string()}) == 2);
    CHECK(run({"train", "--manifest", (dir / "absent.json").string(),
               "--out", (dir / "run").string()}) == 3);
}

TEST_CASE("cli gen-dataset with count zero writes an empty manifest") {
    const fs::path dir = temp_dir("gprseg_cli_empty");
    const std::string out = (dir / "ds").string();
    CHECK(run({"gen-dataset", "--count", "0", "--seed", "4", "--out",
               out}) == 0);
    const RunManifest m = load_manifest(out + "/manifest.json");
    CHECK(m.samples.empty());
    CHECK(m.dataset_id == "ds-seed4-n0");
}

TEST_CASE("cli gen-dataset honors a partial config and round-trips a sample") {
    const fs::path dir = temp_dir("gprseg_cli_gen1");
    const fs::path cfg_path = dir / "config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"simulation": {"n_steps": 220},
                   "preprocess": {"out_rows": 64, "out_cols": 32}})";
    }
    const std::string out = (dir / "ds").string();
    CHECK(run({"gen-dataset", "--config", cfg_path.string(), "--count",
               "1", "--seed", "6", "--out", out}) == 0);

    const RunManifest m = load_manifest(out + "/manifest.json");
    REQUIRE(m.samples.size() == 1);
    CHECK(m.sim.n_steps == 220);
    CHECK(m.sim.n_traces == 99);
    CHECK(m.prep.out_rows == 64);

    const auto loaded = load_split(m, out, "train");
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].scan.rows() == 64);
    CHECK(loaded[0].scan.cols() == 32);
    CHECK(loaded[0].label256.rows() == 64);
    CHECK(loaded[0].labels.rows() == 70);
    CHECK(loaded[0].labels.cols() == 200);

    const GridF bscan =
        read_grid_f(out + "/" + m.samples[0].path_ending("_bscan.gprt"));
    CHECK(bscan.rows() == 220);
    CHECK(bscan.cols() == 99);

    // checksum verification must catch a corrupted file
    const std::string scan_path =
        out + "/" + m.samples[0].path_ending("_scan.gprt");
    std::fstream f(scan_path,
                   std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(40);
    char byte = 0x5a;
    f.write(&byte, 1);
    f.close();
    CHECK_THROWS_AS(load_split(m, out, "train"), IoError);

    // a malformed config file maps to the I/O exit code
    {
        std::ofstream bad(dir / "bad.json");
        bad << "{ nope";
    }
    CHECK(run({"gen-dataset", "--config", (dir / "bad.json").string(),
               "--count", "0", "--out", (dir / "ds2").string()}) == 3);
}
