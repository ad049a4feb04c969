#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gprseg/tensor.hpp"

namespace gprseg {

enum class ArchMode {
    kIndexDecoder,  // decoder upsamples by max-unpooling with encoder indices
    kSkipConcat,    // decoder upsamples bilinearly and concatenates skips
};

std::string arch_mode_name(ArchMode mode);
ArchMode parse_arch_mode(const std::string& name);

struct ArchConfig {
    ArchMode mode = ArchMode::kIndexDecoder;
    std::vector<int> encoder_blocks = {16, 32, 64, 128};
    int convs_per_block = 2;
    int n_classes = 9;
    int input_rows = 256;
    int input_cols = 128;
    double dropout_p = 0.2;

    void validate() const {
        if (n_classes != 9) throw ConfigError("arch: the class set is fixed at 9");
        if (encoder_blocks.empty()) throw ConfigError("arch: no encoder blocks");
        if (convs_per_block < 1) throw ConfigError("arch: convs_per_block must be >= 1");
        if (dropout_p < 0.0 || dropout_p >= 1.0)
            throw ConfigError("arch: dropout_p must lie in [0, 1)");
        int r = input_rows, c = input_cols;
        for (size_t i = 0; i < encoder_blocks.size(); ++i) {
            if (r % 2 != 0 || c % 2 != 0)
                throw ConfigError(
                    "arch: input extents must be divisible by 2^(encoder depth)");
            r /= 2;
            c /= 2;
        }
    }
};

/// One conv3x3 + batchnorm + relu unit with its parameters and statistics.
template <typename T>
struct ConvUnit {
    TensorT<T> w;
    TensorT<T> b;
    TensorT<T> gamma;
    TensorT<T> beta;
    BatchNormState<T> bn;
};

/// Encoder-decoder segmentation network. The encoder is blocks of
/// [conv3x3, BN, ReLU] x convs_per_block followed by 2x2 max pooling; the
/// decoder mirrors it, upsampling either by max-unpooling with the stored
/// encoder indices or by bilinear resize plus channel concatenation of the
/// mirrored encoder feature. A pointwise convolution maps to the 9 class
/// channels and softmax produces per-pixel probabilities. Dropout follows
/// the two deepest encoder blocks.
template <typename T>
class NetworkT {
   public:
    NetworkT(const ArchConfig& arch, uint64_t seed) : arch_(arch) {
        arch_.validate();
        Rng rng(mix_seed(seed, 0x6e657477ULL));
        const int stages = static_cast<int>(arch_.encoder_blocks.size());
        int in_ch = 1;
        for (int i = 0; i < stages; ++i) {
            std::vector<ConvUnit<T>> block;
            for (int j = 0; j < arch_.convs_per_block; ++j) {
                const int out_ch = arch_.encoder_blocks[i];
                block.push_back(make_unit(rng, in_ch, out_ch));
                in_ch = out_ch;
            }
            enc_.push_back(std::move(block));
        }
        for (int i = stages - 1; i >= 0; --i) {
            const int w_i = arch_.encoder_blocks[i];
            const int w_out = arch_.encoder_blocks[i > 0 ? i - 1 : 0];
            std::vector<ConvUnit<T>> block;
            for (int j = 0; j < arch_.convs_per_block; ++j) {
                int cin = w_i;
                if (j == 0 && arch_.mode == ArchMode::kSkipConcat) cin = in_ch + w_i;
                const int cout = j == arch_.convs_per_block - 1 ? w_out : w_i;
                block.push_back(make_unit(rng, cin, cout));
            }
            in_ch = w_out;
            dec_.push_back(std::move(block));
        }
        head_w_ = make_tensor<T>({arch_.n_classes, in_ch}, true);
        head_b_ = make_tensor<T>({arch_.n_classes}, true);
        const double std = std::sqrt(2.0 / in_ch);
        for (auto& v : *head_w_.data) v = static_cast<T>(rng.normal() * std);
    }

    /// Runs the full network and returns per-pixel class probabilities
    /// [N, 9, H, W]. Train mode uses batch statistics, refreshes the running
    /// ones, and applies dropout derived from the given seed.
    TensorT<T> forward(TapeT<T>& tape, const TensorT<T>& x, bool train,
                       uint64_t dropout_seed = 0) {
        if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != arch_.input_rows ||
            x.dim(3) != arch_.input_cols)
            throw ConfigError("forward: expected input [N,1," +
                              std::to_string(arch_.input_rows) + "," +
                              std::to_string(arch_.input_cols) + "]");
        const int stages = static_cast<int>(enc_.size());
        std::vector<PoolIndices> indices(stages);
        std::vector<TensorT<T>> skips(stages);

        TensorT<T> cur = x;
        for (int i = 0; i < stages; ++i) {
            for (auto& unit : enc_[i]) cur = apply_unit(tape, unit, cur, train);
            if (arch_.mode == ArchMode::kSkipConcat) skips[i] = cur;
            auto pooled = maxpool2(tape, cur);
            cur = pooled.first;
            indices[i] = std::move(pooled.second);
            if (i >= stages - 2 && arch_.dropout_p > 0.0)
                cur = dropout(tape, cur, arch_.dropout_p, train,
                              mix_seed(dropout_seed, 0xd0 + static_cast<uint64_t>(i)));
        }
        for (int d = 0; d < stages; ++d) {
            const int i = stages - 1 - d;
            if (arch_.mode == ArchMode::kIndexDecoder) {
                cur = maxunpool2(tape, cur, indices[i]);
            } else {
                cur = bilinear_resize(tape, cur, indices[i].in_shape[2],
                                      indices[i].in_shape[3]);
                cur = concat_channels(tape, cur, skips[i]);
            }
            for (auto& unit : dec_[d]) cur = apply_unit(tape, unit, cur, train);
        }
        cur = conv1x1(tape, cur, head_w_, head_b_);
        return softmax_channels(tape, cur);
    }

    std::vector<std::pair<std::string, TensorT<T>*>> named_parameters() {
        std::vector<std::pair<std::string, TensorT<T>*>> out;
        for (size_t i = 0; i < enc_.size(); ++i)
            for (size_t j = 0; j < enc_[i].size(); ++j)
                append_unit(out, "enc" + std::to_string(i) + "c" + std::to_string(j),
                            enc_[i][j]);
        for (size_t i = 0; i < dec_.size(); ++i)
            for (size_t j = 0; j < dec_[i].size(); ++j)
                append_unit(out, "dec" + std::to_string(i) + "c" + std::to_string(j),
                            dec_[i][j]);
        out.emplace_back("head_w", &head_w_);
        out.emplace_back("head_b", &head_b_);
        return out;
    }

    /// Non-trained state: batchnorm running statistics, in parameter order.
    std::vector<std::pair<std::string, std::vector<T>*>> named_buffers() {
        std::vector<std::pair<std::string, std::vector<T>*>> out;
        auto add = [&out](const std::string& prefix, ConvUnit<T>& u) {
            out.emplace_back(prefix + "_rmean", &u.bn.running_mean);
            out.emplace_back(prefix + "_rvar", &u.bn.running_var);
        };
        for (size_t i = 0; i < enc_.size(); ++i)
            for (size_t j = 0; j < enc_[i].size(); ++j)
                add("enc" + std::to_string(i) + "c" + std::to_string(j), enc_[i][j]);
        for (size_t i = 0; i < dec_.size(); ++i)
            for (size_t j = 0; j < dec_[i].size(); ++j)
                add("dec" + std::to_string(i) + "c" + std::to_string(j), dec_[i][j]);
        return out;
    }

    size_t parameter_count() {
        size_t n = 0;
        for (auto& [name, t] : named_parameters()) n += t->size();
        return n;
    }

    const ArchConfig& arch() const { return arch_; }

   private:
    static ConvUnit<T> make_unit(Rng& rng, int in_ch, int out_ch) {
        ConvUnit<T> u;
        u.w = make_tensor<T>({out_ch, in_ch, 3, 3}, true);
        u.b = make_tensor<T>({out_ch}, true);
        u.gamma = make_tensor<T>({out_ch}, true);
        u.beta = make_tensor<T>({out_ch}, true);
        u.bn = BatchNormState<T>(out_ch);
        const double std = std::sqrt(2.0 / (9.0 * in_ch));
        for (auto& v : *u.w.data) v = static_cast<T>(rng.normal() * std);
        std::fill(u.gamma.data->begin(), u.gamma.data->end(), T(1));
        return u;
    }

    TensorT<T> apply_unit(TapeT<T>& tape, ConvUnit<T>& u, const TensorT<T>& x,
                          bool train) {
        TensorT<T> y = conv2d(tape, x, u.w, u.b);
        y = batchnorm2d(tape, y, u.gamma, u.beta, u.bn, train);
        return relu(tape, y);
    }

    static void append_unit(std::vector<std::pair<std::string, TensorT<T>*>>& out,
                            const std::string& prefix, ConvUnit<T>& u) {
        out.emplace_back(prefix + "_w", &u.w);
        out.emplace_back(prefix + "_b", &u.b);
        out.emplace_back(prefix + "_gamma", &u.gamma);
        out.emplace_back(prefix + "_beta", &u.beta);
    }

    ArchConfig arch_;
    std::vector<std::vector<ConvUnit<T>>> enc_;
    std::vector<std::vector<ConvUnit<T>>> dec_;
    TensorT<T> head_w_;
    TensorT<T> head_b_;
};

using Network = NetworkT<float>;

}  // namespace gprseg
