#pragma once

#include <algorithm>
#include <numeric>

#include "gprseg/tensor.hpp"

namespace gprseg {

namespace detail {

template <typename T>
void check_probs_labels(const TensorT<T>& probs, const std::vector<GridU8>& labels) {
    if (probs.rank() != 4) throw ConfigError("loss: expected probs[N,C,H,W]");
    if (labels.size() != static_cast<size_t>(probs.dim(0)))
        throw ConfigError("loss: one label map per batch element required");
    for (const auto& l : labels) {
        if (l.rows() != probs.dim(2) || l.cols() != probs.dim(3))
            throw ConfigError("loss: label map shape does not match probabilities");
        for (size_t i = 0; i < l.size(); ++i)
            if (l.data()[i] >= probs.dim(1))
                throw ConfigError("loss: label id outside the class channel range");
    }
}

}  // namespace detail

/// Mean negative log probability of the true class over all scored pixels,
/// with the probability clamped at 1e-12 before the log.
template <typename T>
TensorT<T> loss_ce(TapeT<T>& tape, const TensorT<T>& probs,
                   const std::vector<GridU8>& labels) {
    detail::check_probs_labels(probs, labels);
    const int n = probs.dim(0), c = probs.dim(1);
    const size_t hw = static_cast<size_t>(probs.dim(2)) * probs.dim(3);
    const double npix = static_cast<double>(n) * hw;
    const T clamp = static_cast<T>(1e-12);

    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const T* p = probs.ptr() + static_cast<size_t>(i) * c * hw;
        const uint8_t* l = labels[i].data();
        for (size_t s = 0; s < hw; ++s)
            acc -= std::log(std::max(p[static_cast<size_t>(l[s]) * hw + s], clamp));
    }
    TensorT<T> y = make_tensor<T>({1});
    (*y.data)[0] = static_cast<T>(acc / npix);

    if (probs.requires_grad) {
        y.requires_grad = true;
        TensorT<T> pc = probs, yc = y;
        auto lc = labels;
        tape.record([pc, yc, lc, n, c, hw, npix, clamp]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(pc);
            const T g = (*yc.grad)[0];
            for (int i = 0; i < n; ++i) {
                const T* p = pc.ptr() + static_cast<size_t>(i) * c * hw;
                T* dp = pc.gptr() + static_cast<size_t>(i) * c * hw;
                const uint8_t* l = lc[i].data();
                for (size_t s = 0; s < hw; ++s) {
                    const size_t at = static_cast<size_t>(l[s]) * hw + s;
                    if (p[at] > clamp)
                        dp[at] -= g / static_cast<T>(npix * p[at]);
                }
            }
        });
    }
    return y;
}

/// Lovász-softmax loss: the Lovász extension of the Jaccard loss applied to
/// per-class pixel-error vectors, averaged over the class set. By default
/// the set is the classes present in the batch ground truth; with
/// average_all_classes the mean runs over every class channel.
template <typename T>
TensorT<T> loss_lovasz(TapeT<T>& tape, const TensorT<T>& probs,
                       const std::vector<GridU8>& labels,
                       bool average_all_classes = false) {
    detail::check_probs_labels(probs, labels);
    const int n = probs.dim(0), c = probs.dim(1);
    const size_t hw = static_cast<size_t>(probs.dim(2)) * probs.dim(3);
    const size_t npix = static_cast<size_t>(n) * hw;

    std::vector<size_t> class_count(c, 0);
    for (int i = 0; i < n; ++i)
        for (size_t s = 0; s < hw; ++s) ++class_count[labels[i].data()[s]];

    std::vector<int> class_set;
    for (int ch = 0; ch < c; ++ch)
        if (average_all_classes || class_count[ch] > 0) class_set.push_back(ch);

    // gradient of the loss with respect to each class probability plane
    auto dprobs = std::make_shared<std::vector<T>>(probs.size(), T(0));
    std::vector<T> m(npix);
    std::vector<size_t> order(npix);
    double total = 0.0;

    for (int ch : class_set) {
        for (int i = 0; i < n; ++i) {
            const T* p = probs.ptr() + (static_cast<size_t>(i) * c + ch) * hw;
            const uint8_t* l = labels[i].data();
            for (size_t s = 0; s < hw; ++s)
                m[static_cast<size_t>(i) * hw + s] =
                    l[s] == ch ? T(1) - p[s] : p[s];
        }
        std::iota(order.begin(), order.end(), size_t(0));
        std::stable_sort(order.begin(), order.end(),
                         [&m](size_t a, size_t b) { return m[a] > m[b]; });

        const double positives = static_cast<double>(class_count[ch]);
        double cum_delta = 0.0;
        double cum_miss = 0.0;
        double prev_j = 0.0;
        double class_loss = 0.0;
        for (size_t k = 0; k < npix; ++k) {
            const size_t pix = order[k];
            const int img = static_cast<int>(pix / hw);
            const bool is_c = labels[img].data()[pix % hw] == ch;
            if (is_c)
                cum_delta += 1.0;
            else
                cum_miss += 1.0;
            const double inter = positives - cum_delta;
            const double uni = positives + cum_miss;
            const double j = uni > 0.0 ? 1.0 - inter / uni : 0.0;
            const double g = j - prev_j;
            prev_j = j;
            class_loss += static_cast<double>(m[pix]) * g;
            if (g != 0.0) {
                // dm/dp is -1 on true-class pixels and +1 elsewhere
                const size_t at = (static_cast<size_t>(img) * c + ch) * hw + pix % hw;
                (*dprobs)[at] += static_cast<T>((is_c ? -1.0 : 1.0) * g);
            }
        }
        total += class_loss;
    }
    const double denom = class_set.empty() ? 1.0 : static_cast<double>(class_set.size());

    TensorT<T> y = make_tensor<T>({1});
    (*y.data)[0] = static_cast<T>(total / denom);

    if (probs.requires_grad) {
        y.requires_grad = true;
        TensorT<T> pc = probs, yc = y;
        tape.record([pc, yc, dprobs, denom]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(pc);
            const T g = (*yc.grad)[0];
            for (size_t i = 0; i < pc.size(); ++i)
                (*pc.grad)[i] += g * (*dprobs)[i] / static_cast<T>(denom);
        });
    }
    return y;
}

/// Composite objective: cross-entropy plus Lovász-softmax with unit weights.
template <typename T>
TensorT<T> loss_sum(TapeT<T>& tape, const TensorT<T>& probs,
                    const std::vector<GridU8>& labels,
                    bool average_all_classes = false) {
    TensorT<T> ce = loss_ce(tape, probs, labels);
    TensorT<T> lv = loss_lovasz(tape, probs, labels, average_all_classes);
    return add(tape, ce, lv);
}

}  // namespace gprseg
