#include "gprseg/train.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gprseg/container.hpp"
#include "gprseg/metrics.hpp"
#include "gprseg/sigproc.hpp"

namespace gprseg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string loss_kind_name(LossKind kind) {
    return kind == LossKind::kCeOnly ? "ce" : "ce+lovasz";
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "ce") return LossKind::kCeOnly;
    if (name == "ce+lovasz") return LossKind::kCePlusLovasz;
    throw ConfigError("loss: unknown kind '" + name + "' (ce | ce+lovasz)");
}

namespace {

json arch_to_json(const ArchConfig& a) {
    return json{{"mode", arch_mode_name(a.mode)},
                {"encoder_blocks", a.encoder_blocks},
                {"convs_per_block", a.convs_per_block},
                {"n_classes", a.n_classes},
                {"input_rows", a.input_rows},
                {"input_cols", a.input_cols},
                {"dropout_p", a.dropout_p}};
}

ArchConfig arch_from_json(const json& j) {
    ArchConfig a;
    a.mode = parse_arch_mode(j.at("mode").get<std::string>());
    a.encoder_blocks = j.at("encoder_blocks").get<std::vector<int>>();
    a.convs_per_block = j.at("convs_per_block").get<int>();
    a.n_classes = j.at("n_classes").get<int>();
    a.input_rows = j.at("input_rows").get<int>();
    a.input_cols = j.at("input_cols").get<int>();
    a.dropout_p = j.at("dropout_p").get<double>();
    return a;
}

void write_float_blob(const std::string& path, const std::vector<float>& v) {
    write_blob(path, blob_from_floats(v, {v.size()}));
}

std::vector<float> read_float_blob(const std::string& path) {
    return floats_from_blob(read_blob(path));
}

/// Assembles [B,1,H,W] input and per-element label maps for one batch.
/// With a noise library, every scan is augmented before entering the batch.
struct BatchView {
    Tensor x;
    std::vector<GridU8> labels;
};

BatchView make_batch(const std::vector<const LoadedSample*>& items,
                     const NoiseLibrary* augment, uint64_t aug_seed) {
    const int b = static_cast<int>(items.size());
    const int h = items[0]->scan.rows(), w = items[0]->scan.cols();
    BatchView out;
    out.x = make_tensor<float>({b, 1, h, w});
    const size_t hw = static_cast<size_t>(h) * w;
    for (int i = 0; i < b; ++i) {
        const GridF& scan = items[i]->scan;
        if (scan.rows() != h || scan.cols() != w)
            throw ConfigError("train: inconsistent scan shapes in one split");
        float* dst = out.x.ptr() + static_cast<size_t>(i) * hw;
        if (augment) {
            const GridD noisy = augment_with_noise(
                grid_to_double(scan), *augment,
                mix_seed(aug_seed, static_cast<uint64_t>(items[i]->record.index)));
            for (size_t s = 0; s < hw; ++s)
                dst[s] = static_cast<float>(noisy.data()[s]);
        } else {
            std::copy(scan.data(), scan.data() + hw, dst);
        }
        out.labels.push_back(items[i]->label256);
    }
    return out;
}

struct EpochLosses {
    double ce = 0.0;
    double lovasz = 0.0;
};

/// Eval-mode pass over a split: mean loss components plus MIoU of the
/// argmax maps against the labels at network resolution.
EpochLosses evaluate_split(Network& net, const std::vector<LoadedSample>& split,
                           int batch_size, bool lovasz_all_classes, double* miou) {
    EpochLosses acc;
    size_t n_samples = 0;
    ConfusionMatrix cm;
    for (size_t at = 0; at < split.size(); at += static_cast<size_t>(batch_size)) {
        const size_t end = std::min(at + static_cast<size_t>(batch_size), split.size());
        std::vector<const LoadedSample*> items;
        for (size_t i = at; i < end; ++i) items.push_back(&split[i]);
        BatchView batch = make_batch(items, nullptr, 0);
        TapeT<float> tape;
        Tensor probs = net.forward(tape, batch.x, false);
        Tensor ce = loss_ce(tape, probs, batch.labels);
        Tensor lv = loss_lovasz(tape, probs, batch.labels, lovasz_all_classes);
        acc.ce += static_cast<double>((*ce.data)[0]) * static_cast<double>(items.size());
        acc.lovasz +=
            static_cast<double>((*lv.data)[0]) * static_cast<double>(items.size());
        n_samples += items.size();
        for (size_t i = 0; i < items.size(); ++i) {
            const GridU8 pred = argmax_channels(probs, static_cast<int>(i));
            accumulate_confusion(cm, pred, items[i]->label256);
        }
    }
    acc.ce /= static_cast<double>(n_samples);
    acc.lovasz /= static_cast<double>(n_samples);
    if (miou) *miou = compute_metrics(cm).miou;
    return acc;
}

constexpr const char* kHistoryHeader =
    "epoch,train_ce,train_lovasz,valid_ce,valid_lovasz,valid_miou";

/// Rewrites history.csv keeping only the header and the first `keep` rows,
/// so a resumed run appends its rows after exactly the completed epochs.
void trim_history(const std::string& path, int keep) {
    std::vector<std::string> rows;
    {
        std::ifstream in(path);
        std::string line;
        if (in && std::getline(in, line)) {
            while (static_cast<int>(rows.size()) < keep && std::getline(in, line))
                if (!line.empty()) rows.push_back(line);
        }
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("train: cannot write " + path);
    out << kHistoryHeader << "\n";
    for (const auto& r : rows) out << r << "\n";
}

void append_history(const std::string& path, const HistoryRow& row) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("train: cannot write " + path);
    out << row.epoch << "," << row.train_ce << "," << row.train_lovasz << ","
        << row.valid_ce << "," << row.valid_lovasz << "," << row.valid_miou << "\n";
}

}  // namespace

void save_checkpoint(const std::string& dir, Network& net,
                     const AdamState<float>& adam, const CheckpointMeta& meta) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("checkpoint: cannot create " + dir);

    json j;
    j["arch"] = arch_to_json(meta.arch);
    j["loss"] = loss_kind_name(meta.loss);
    j["seed"] = meta.seed;
    j["epoch"] = meta.epoch;
    j["best_epoch"] = meta.best_epoch;
    j["best_valid_miou"] = meta.best_valid_miou;
    j["adam_t"] = adam.t;
    std::ofstream out(fs::path(dir) / "meta.json");
    if (!out) throw IoError("checkpoint: cannot write meta.json in " + dir);
    out << j.dump(2) << "\n";

    auto params = net.named_parameters();
    for (size_t i = 0; i < params.size(); ++i) {
        const std::string stem = (fs::path(dir) / ("p_" + params[i].first)).string();
        write_float_blob(stem + ".gprt", *params[i].second->data);
        if (!adam.m.empty()) {
            write_float_blob((fs::path(dir) / ("m_" + params[i].first)).string() +
                                 ".gprt",
                             adam.m[i]);
            write_float_blob((fs::path(dir) / ("v_" + params[i].first)).string() +
                                 ".gprt",
                             adam.v[i]);
        }
    }
    for (auto& [name, buf] : net.named_buffers())
        write_float_blob((fs::path(dir) / ("b_" + name)).string() + ".gprt", *buf);
}

Checkpoint load_checkpoint(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "meta.json");
    if (!in) throw IoError("checkpoint: cannot read meta.json in " + dir);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("checkpoint: invalid meta.json: " + std::string(e.what()));
    }
    CheckpointMeta meta;
    try {
        meta.arch = arch_from_json(j.at("arch"));
        meta.loss = parse_loss_kind(j.at("loss").get<std::string>());
        meta.seed = j.at("seed").get<uint64_t>();
        meta.epoch = j.at("epoch").get<int>();
        meta.best_epoch = j.value("best_epoch", 0);
        meta.best_valid_miou = j.at("best_valid_miou").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError("checkpoint: malformed meta.json: " + std::string(e.what()));
    }

    Checkpoint ck{meta, Network(meta.arch, meta.seed), AdamState<float>{}};
    auto params = ck.net.named_parameters();
    const bool has_moments =
        fs::exists(fs::path(dir) / ("m_" + params[0].first + ".gprt"));
    if (has_moments) {
        ck.adam.m.resize(params.size());
        ck.adam.v.resize(params.size());
        ck.adam.t = j.value("adam_t", int64_t{0});
    }
    for (size_t i = 0; i < params.size(); ++i) {
        auto v = read_float_blob((fs::path(dir) / ("p_" + params[i].first)).string() +
                                 ".gprt");
        if (v.size() != params[i].second->size())
            throw ConfigError("checkpoint: size mismatch for " + params[i].first);
        *params[i].second->data = std::move(v);
        if (has_moments) {
            ck.adam.m[i] = read_float_blob(
                (fs::path(dir) / ("m_" + params[i].first)).string() + ".gprt");
            ck.adam.v[i] = read_float_blob(
                (fs::path(dir) / ("v_" + params[i].first)).string() + ".gprt");
            if (ck.adam.m[i].size() != params[i].second->size() ||
                ck.adam.v[i].size() != params[i].second->size())
                throw ConfigError("checkpoint: moment size mismatch for " +
                                  params[i].first);
        }
    }
    for (auto& [name, buf] : ck.net.named_buffers()) {
        auto v = read_float_blob((fs::path(dir) / ("b_" + name)).string() + ".gprt");
        if (v.size() != buf->size())
            throw ConfigError("checkpoint: buffer size mismatch for " + name);
        *buf = std::move(v);
    }
    return ck;
}

namespace {

TrainResult run_training(Network& net, AdamState<float>& adam, int start_epoch,
                         double best_valid_miou, int best_epoch,
                         const std::vector<LoadedSample>& train_set,
                         const std::vector<LoadedSample>& valid_set,
                         const TrainConfig& cfg, const std::string& out_dir,
                         const NoiseLibrary* augment) {
    if (train_set.empty()) throw ConfigError("train: empty training split");
    if (valid_set.empty()) throw ConfigError("train: empty validation split");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("train: cannot create " + out_dir);
    const std::string history_path = (fs::path(out_dir) / "history.csv").string();
    const std::string best_dir = (fs::path(out_dir) / "best").string();
    const std::string last_dir = (fs::path(out_dir) / "last").string();
    trim_history(history_path, start_epoch);

    auto params = net.named_parameters();
    std::vector<Tensor*> plist;
    for (auto& [name, t] : params) {
        t->requires_grad = true;
        plist.push_back(t);
    }
    AdamConfig acfg;
    acfg.lr = cfg.lr;
    acfg.weight_decay = cfg.weight_decay;

    TrainResult res;
    res.best_valid_miou = best_valid_miou;
    res.best_epoch = best_epoch;
    res.best_dir = best_dir;
    res.last_dir = last_dir;

    const uint64_t shuffle_stream = mix_seed(cfg.seed, 0x73687566ULL);
    const uint64_t dropout_stream = mix_seed(cfg.seed, 0x64726f70ULL);
    const uint64_t augment_stream = mix_seed(cfg.seed, 0x617567ULL);

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        std::vector<const LoadedSample*> order;
        for (const auto& s : train_set) order.push_back(&s);
        Rng shuffle_rng(mix_seed(shuffle_stream, static_cast<uint64_t>(epoch)));
        for (size_t i = order.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(
                shuffle_rng.uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }

        double ep_ce = 0.0, ep_lv = 0.0;
        size_t seen = 0;
        int batch_index = 0;
        for (size_t at = 0; at < order.size();
             at += static_cast<size_t>(cfg.batch_size), ++batch_index) {
            std::vector<const LoadedSample*> items(
                order.begin() + static_cast<ptrdiff_t>(at),
                order.begin() +
                    static_cast<ptrdiff_t>(
                        std::min(at + cfg.batch_size, order.size())));
            const uint64_t tag =
                static_cast<uint64_t>(epoch) * 1000003ULL +
                static_cast<uint64_t>(batch_index);
            BatchView batch =
                make_batch(items, augment, mix_seed(augment_stream, tag));

            for (auto* p : plist) zero_grad(*p);
            TapeT<float> tape;
            Tensor probs =
                net.forward(tape, batch.x, true, mix_seed(dropout_stream, tag));
            Tensor ce = loss_ce(tape, probs, batch.labels);
            Tensor lv =
                loss_lovasz(tape, probs, batch.labels, cfg.lovasz_all_classes);
            const double ce_v = (*ce.data)[0], lv_v = (*lv.data)[0];
            if (!std::isfinite(ce_v) || !std::isfinite(lv_v))
                throw NonFiniteLossError(
                    "train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                    ", batch " + std::to_string(batch_index) +
                    " (ce=" + std::to_string(ce_v) +
                    ", lovasz=" + std::to_string(lv_v) + ")");
            ep_ce += ce_v * static_cast<double>(items.size());
            ep_lv += lv_v * static_cast<double>(items.size());
            seen += items.size();

            Tensor loss =
                cfg.loss == LossKind::kCeOnly ? ce : add(tape, ce, lv);
            tape.backward(loss);
            adam_step(plist, adam, acfg);
        }

        HistoryRow row;
        row.epoch = epoch + 1;
        row.train_ce = ep_ce / static_cast<double>(seen);
        row.train_lovasz = ep_lv / static_cast<double>(seen);
        EpochLosses val = evaluate_split(net, valid_set, cfg.batch_size,
                                         cfg.lovasz_all_classes, &row.valid_miou);
        row.valid_ce = val.ce;
        row.valid_lovasz = val.lovasz;
        append_history(history_path, row);
        res.history.push_back(row);

        CheckpointMeta meta;
        meta.arch = net.arch();
        meta.loss = cfg.loss;
        meta.seed = cfg.seed;
        meta.epoch = epoch + 1;
        if (row.valid_miou > res.best_valid_miou) {
            res.best_valid_miou = row.valid_miou;
            res.best_epoch = epoch + 1;
        }
        meta.best_epoch = res.best_epoch;
        meta.best_valid_miou = res.best_valid_miou;
        save_checkpoint(last_dir, net, adam, meta);
        if (res.best_epoch == epoch + 1) save_checkpoint(best_dir, net, adam, meta);
    }
    return res;
}

}  // namespace

TrainResult train(const std::vector<LoadedSample>& train_set,
                  const std::vector<LoadedSample>& valid_set,
                  const ArchConfig& arch, const TrainConfig& cfg,
                  const std::string& out_dir, const NoiseLibrary* augment) {
    arch.validate();
    const std::string last_dir = (fs::path(out_dir) / "last").string();
    if (fs::exists(fs::path(last_dir) / "meta.json")) {
        Checkpoint ck = load_checkpoint(last_dir);
        if (ck.meta.epoch > cfg.epochs)
            throw ConfigError("train: checkpoint in " + last_dir + " already has " +
                              std::to_string(ck.meta.epoch) + " epochs");
        return run_training(ck.net, ck.adam, ck.meta.epoch, ck.meta.best_valid_miou,
                            ck.meta.best_epoch, train_set, valid_set, cfg, out_dir,
                            augment);
    }
    Network net(arch, cfg.seed);
    AdamState<float> adam;
    return run_training(net, adam, 0, -1.0, 0, train_set, valid_set, cfg, out_dir,
                        augment);
}

TrainResult finetune(const std::string& base_checkpoint_dir,
                     const std::vector<LoadedSample>& train_set,
                     const std::vector<LoadedSample>& valid_set,
                     const NoiseLibrary& lib, const TrainConfig& cfg,
                     const std::string& out_dir) {
    Checkpoint base = load_checkpoint(base_checkpoint_dir);
    if (cfg.epochs == 0) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw IoError("finetune: cannot create " + out_dir);
        save_checkpoint((fs::path(out_dir) / "best").string(), base.net, base.adam,
                        base.meta);
        save_checkpoint((fs::path(out_dir) / "last").string(), base.net, base.adam,
                        base.meta);
        TrainResult res;
        res.best_valid_miou = base.meta.best_valid_miou;
        res.best_epoch = base.meta.best_epoch;
        res.best_dir = (fs::path(out_dir) / "best").string();
        res.last_dir = (fs::path(out_dir) / "last").string();
        return res;
    }
    const std::string last_dir = (fs::path(out_dir) / "last").string();
    if (fs::exists(fs::path(last_dir) / "meta.json")) {
        Checkpoint ck = load_checkpoint(last_dir);
        if (ck.meta.epoch > cfg.epochs)
            throw ConfigError("finetune: checkpoint in " + last_dir +
                              " already has " + std::to_string(ck.meta.epoch) +
                              " epochs");
        return run_training(ck.net, ck.adam, ck.meta.epoch, ck.meta.best_valid_miou,
                            ck.meta.best_epoch, train_set, valid_set, cfg, out_dir,
                            &lib);
    }
    AdamState<float> fresh;  // finetuning restarts the optimizer statistics
    return run_training(base.net, fresh, 0, -1.0, 0, train_set, valid_set, cfg,
                        out_dir, &lib);
}

GridU8 predict_input_map(Network& net, const GridF& scan) {
    const ArchConfig& arch = net.arch();
    if (scan.rows() != arch.input_rows || scan.cols() != arch.input_cols)
        throw ConfigError("predict: scan shape does not match the network input");
    Tensor x = make_tensor<float>({1, 1, arch.input_rows, arch.input_cols});
    std::copy(scan.data(), scan.data() + scan.size(), x.ptr());
    TapeT<float> tape;
    Tensor probs = net.forward(tape, x, false);
    return argmax_channels(probs);
}

GridU8 predict_output_map(Network& net, const GridF& scan) {
    return nearest_resize(predict_input_map(net, scan), 90, 220);
}

}  // namespace gprseg
