#include "gprseg/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "config_json.hpp"
#include "gprseg/dataset.hpp"
#include "gprseg/report.hpp"
#include "gprseg/testbed.hpp"
#include "gprseg/train.hpp"

namespace gprseg {

namespace fs = std::filesystem;

namespace {

DatasetConfig read_dataset_config(const std::string& path) {
    DatasetConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("config: invalid JSON in " + path + ": " +
                      std::string(e.what()));
    }
    try {
        if (j.contains("generation"))
            cfg.gen = j.at("generation").get<GenerationConfig>();
        if (j.contains("simulation"))
            cfg.sim = j.at("simulation").get<SimConfig>();
        if (j.contains("preprocess"))
            cfg.prep = j.at("preprocess").get<PreprocessConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: malformed section in " + path + ": " +
                          std::string(e.what()));
    }
    return cfg;
}

int do_gen_dataset(const std::string& config_path, int count, uint64_t seed,
                   const std::string& out) {
    DatasetConfig cfg = read_dataset_config(config_path);
    cfg.count = count;
    cfg.seed = seed;
    const RunManifest manifest =
        generate_dataset(cfg, out, [](int done, int total) {
            std::cout << "[gen-dataset] sample " << done << "/" << total
                      << std::endl;
        });
    std::cout << "[gen-dataset] " << manifest.samples.size() << " samples, id "
              << manifest.dataset_id << ", manifest "
              << (fs::path(out) / "manifest.json").string() << "\n";
    return 0;
}

int do_train(const std::string& manifest_path, const std::string& arch_name,
             const std::string& loss_name, const std::string& out,
             const TrainConfig& base) {
    const RunManifest manifest = load_manifest(manifest_path);
    const std::string dataset_dir = fs::path(manifest_path).parent_path().string();
    const auto train_set = load_split(manifest, dataset_dir, "train");
    const auto valid_set = load_split(manifest, dataset_dir, "valid");

    ArchConfig arch;
    arch.mode = parse_arch_mode(arch_name);
    arch.input_rows = manifest.prep.out_rows;
    arch.input_cols = manifest.prep.out_cols;

    TrainConfig cfg = base;
    cfg.loss = parse_loss_kind(loss_name);

    const TrainResult res = train(train_set, valid_set, arch, cfg, out);
    std::cout << "[train] " << res.history.size() << " epochs, best valid MIoU "
              << res.best_valid_miou << " at epoch " << res.best_epoch << ", "
              << res.best_dir << "\n";
    return 0;
}

int do_eval(const std::string& checkpoint, const std::string& manifest_path,
            const std::string& split, const std::string& report_dir) {
    if (split != "train" && split != "valid" && split != "test")
        throw ConfigError("eval: unknown split '" + split + "'");
    Checkpoint ck = load_checkpoint(checkpoint);
    const RunManifest manifest = load_manifest(manifest_path);
    const std::string dataset_dir = fs::path(manifest_path).parent_path().string();
    const auto samples = load_split(manifest, dataset_dir, split);
    if (samples.empty())
        throw ConfigError("eval: split '" + split + "' has no samples in " +
                          manifest_path);

    const std::string method =
        arch_mode_name(ck.meta.arch.mode) + "+" + loss_kind_name(ck.meta.loss);
    const EvalReport report =
        evaluate_split_report(ck.net, method, split, samples);
    write_report(report_dir, report);
    write_split_heatmaps((fs::path(report_dir) / "heatmaps").string(), ck.net,
                         samples);
    const Metrics m = compute_metrics(report.overall);
    std::cout << "[eval] " << method << " on " << split << ": MPA " << m.mpa
              << ", MIoU " << m.miou << ", FWIoU " << m.fwiou << " ("
              << samples.size() << " samples)\n";
    return 0;
}

int do_testbed(const std::string& out, const std::string& checkpoint,
               const std::string& manifest, int epochs) {
    TestbedConfig cfg;
    cfg.finetune.epochs = epochs;
    const TestbedResult res = run_testbed(cfg, out, checkpoint, manifest);
    std::cout << "[testbed] noise library entries: " << res.noise_entries << "\n";
    std::cout << "[testbed] true wet-void centroid (row, col): (" << res.true_row
              << ", " << res.true_col << ")\n";
    if (res.predicted) {
        std::cout << "[testbed] predicted centroid (row, col): (" << res.pred_row
                  << ", " << res.pred_col << ") over " << res.pred_pixels
                  << " pixels\n";
        std::cout << "[testbed] centroid error: " << res.centroid_error_m
                  << " m\n";
    } else {
        std::cout << "[testbed] no checkpoint/manifest given; skipped finetune "
                     "and prediction\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"GPR tunnel-lining defect segmentation toolchain"};
    app.require_subcommand(1);
    int code = 0;

    auto* gen = app.add_subcommand(
        "gen-dataset", "Generate synthetic lining models and simulated scans");
    std::string gen_config, gen_out;
    int gen_count = 0;
    uint64_t gen_seed = 0;
    gen->add_option("--config", gen_config,
                    "JSON with optional generation/simulation/preprocess keys");
    gen->add_option("--count", gen_count, "Number of samples")->required();
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--out", gen_out, "Output dataset directory")->required();
    gen->callback(
        [&] { code = do_gen_dataset(gen_config, gen_count, gen_seed, gen_out); });

    auto* tr = app.add_subcommand("train", "Train a segmentation network");
    std::string tr_manifest, tr_arch = "index-decoder", tr_loss = "ce+lovasz",
                tr_out;
    TrainConfig tr_cfg;
    tr->add_option("--manifest", tr_manifest, "Dataset manifest.json")->required();
    tr->add_option("--arch", tr_arch, "index-decoder | skip-concat");
    tr->add_option("--loss", tr_loss, "ce | ce+lovasz");
    tr->add_option("--out", tr_out, "Run directory")->required();
    tr->add_option("--epochs", tr_cfg.epochs, "Training epochs");
    tr->add_option("--seed", tr_cfg.seed, "Init/shuffle/dropout seed");
    tr->add_option("--batch-size", tr_cfg.batch_size, "Samples per step");
    tr->add_option("--lr", tr_cfg.lr, "Adam learning rate");
    tr->add_option("--weight-decay", tr_cfg.weight_decay, "L2 coefficient");
    tr->callback(
        [&] { code = do_train(tr_manifest, tr_arch, tr_loss, tr_out, tr_cfg); });

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
    std::string ev_checkpoint, ev_manifest, ev_split = "test", ev_report;
    ev->add_option("--checkpoint", ev_checkpoint, "Checkpoint directory")
        ->required();
    ev->add_option("--manifest", ev_manifest, "Dataset manifest.json")->required();
    ev->add_option("--split", ev_split, "train | valid | test");
    ev->add_option("--report", ev_report, "Report output directory")->required();
    ev->callback(
        [&] { code = do_eval(ev_checkpoint, ev_manifest, ev_split, ev_report); });

    auto* tb = app.add_subcommand(
        "testbed", "Simulate the physical validation sections and predict");
    std::string tb_out, tb_checkpoint, tb_manifest;
    int tb_epochs = 40;
    tb->add_option("--out", tb_out, "Output directory")->required();
    tb->add_option("--checkpoint", tb_checkpoint,
                   "Base checkpoint to fine-tune from");
    tb->add_option("--manifest", tb_manifest,
                   "Dataset manifest for the fine-tuning splits");
    tb->add_option("--epochs", tb_epochs, "Fine-tuning epochs");
    tb->callback(
        [&] { code = do_testbed(tb_out, tb_checkpoint, tb_manifest, tb_epochs); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InstabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NonFiniteLossError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return code;
}

}  // namespace gprseg
