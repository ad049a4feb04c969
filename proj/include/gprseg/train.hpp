#pragma once

#include <string>
#include <vector>

#include "gprseg/dataset.hpp"
#include "gprseg/losses.hpp"
#include "gprseg/network.hpp"

namespace gprseg {

enum class LossKind { kCeOnly = 0, kCePlusLovasz = 1 };

std::string loss_kind_name(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

struct TrainConfig {
    LossKind loss = LossKind::kCePlusLovasz;
    int batch_size = 24;
    double lr = 5e-5;
    int epochs = 100;
    double weight_decay = 1e-4;
    uint64_t seed = 0;
    bool lovasz_all_classes = false;
};

/// One history.csv row. Both loss components are recorded for every run;
/// a ce-only run still reports the Lovász value it would have incurred.
struct HistoryRow {
    int epoch = 0;
    double train_ce = 0.0;
    double train_lovasz = 0.0;
    double valid_ce = 0.0;
    double valid_lovasz = 0.0;
    double valid_miou = 0.0;
};

struct CheckpointMeta {
    ArchConfig arch;
    LossKind loss = LossKind::kCePlusLovasz;
    uint64_t seed = 0;
    int epoch = 0;  // completed epochs
    int best_epoch = 0;
    double best_valid_miou = -1.0;
};

struct Checkpoint {
    CheckpointMeta meta;
    Network net;
    AdamState<float> adam;
};

/// Writes meta.json plus one container file per parameter, batchnorm buffer,
/// and Adam moment into `dir` (created if needed).
void save_checkpoint(const std::string& dir, Network& net,
                     const AdamState<float>& adam, const CheckpointMeta& meta);

/// Rebuilds the network from the stored architecture and restores every
/// tensor bit-exactly.
Checkpoint load_checkpoint(const std::string& dir);

struct TrainResult {
    std::vector<HistoryRow> history;  // rows produced by this call
    double best_valid_miou = -1.0;
    int best_epoch = 0;
    std::string best_dir;
    std::string last_dir;
};

/// Epoch loop over shuffled batches with Adam and per-epoch validation.
/// Writes out_dir/history.csv (one row per epoch), out_dir/last (checkpoint
/// after every epoch), and out_dir/best (highest validation MIoU). When
/// out_dir/last already holds a checkpoint with fewer completed epochs than
/// cfg.epochs, training resumes from it and replays the identical schedule,
/// so a split run matches an uninterrupted one bit for bit. When `augment`
/// is set, every training scan is mixed with library noise before batching.
TrainResult train(const std::vector<LoadedSample>& train_set,
                  const std::vector<LoadedSample>& valid_set,
                  const ArchConfig& arch, const TrainConfig& cfg,
                  const std::string& out_dir,
                  const NoiseLibrary* augment = nullptr);

/// Continues from a trained checkpoint with noise augmentation and a fresh
/// optimizer state. epochs = 0 re-emits the base checkpoint unchanged.
TrainResult finetune(const std::string& base_checkpoint_dir,
                     const std::vector<LoadedSample>& train_set,
                     const std::vector<LoadedSample>& valid_set,
                     const NoiseLibrary& lib, const TrainConfig& cfg,
                     const std::string& out_dir);

/// Eval-mode forward and per-pixel argmax at the network resolution.
GridU8 predict_input_map(Network& net, const GridF& scan);

/// predict_input_map followed by nearest-neighbor resize of the id map to
/// the 90x220 output resolution.
GridU8 predict_output_map(Network& net, const GridF& scan);

}  // namespace gprseg
