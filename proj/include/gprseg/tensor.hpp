#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "gprseg/common.hpp"

namespace gprseg {

/// Dense NCHW tensor. `data` is shared so tape nodes can hold the buffers
/// they need for the backward pass. `grad` shares its identity across every
/// copy of the tensor (tape closures capture copies), but stays an empty
/// vector until a backward pass touches it, so gradient storage is only paid
/// for tensors that receive gradient.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::shared_ptr<std::vector<T>> data;
    std::shared_ptr<std::vector<T>> grad;
    bool requires_grad = false;

    TensorT() = default;

    size_t size() const { return data ? data->size() : 0; }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }
    T* ptr() { return data->data(); }
    const T* ptr() const { return data->data(); }
    T* gptr() { return grad->data(); }
    const T* gptr() const { return grad->data(); }
    bool has_grad() const { return grad && !grad->empty(); }
};

inline size_t numel(const std::vector<int>& shape) {
    size_t n = 1;
    for (int e : shape) n *= static_cast<size_t>(e);
    return n;
}

template <typename T>
TensorT<T> make_tensor(std::vector<int> shape, bool requires_grad = false) {
    TensorT<T> t;
    t.shape = std::move(shape);
    t.data = std::make_shared<std::vector<T>>(numel(t.shape), T(0));
    t.grad = std::make_shared<std::vector<T>>();
    t.requires_grad = requires_grad;
    return t;
}

template <typename T>
TensorT<T> tensor_from(std::vector<int> shape, std::vector<T> values,
                       bool requires_grad = false) {
    if (numel(shape) != values.size())
        throw ConfigError("tensor_from: shape does not match value count");
    TensorT<T> t;
    t.shape = std::move(shape);
    t.data = std::make_shared<std::vector<T>>(std::move(values));
    t.grad = std::make_shared<std::vector<T>>();
    t.requires_grad = requires_grad;
    return t;
}

/// Materializes zero-filled gradient storage in place, so every copy of the
/// tensor sees it.
template <typename T>
void ensure_grad(TensorT<T>& t) {
    if (!t.grad) t.grad = std::make_shared<std::vector<T>>();
    if (t.grad->size() != t.size()) t.grad->assign(t.size(), T(0));
}

template <typename T>
void zero_grad(TensorT<T>& t) {
    if (t.grad) std::fill(t.grad->begin(), t.grad->end(), T(0));
}

/// Argmax locations recorded by maxpool2 so the mirrored decoder stage can
/// scatter values back to where they came from.
struct PoolIndices {
    std::vector<int32_t> idx;   // flat index into the pooled input, per output
    std::vector<int> in_shape;  // NCHW shape of the pooled input
};

/// Reverse-mode tape. Operations append a closure that propagates the
/// output's gradient to its inputs; backward() runs them newest-first and
/// releases each closure as it completes so activation memory drains during
/// the sweep.
template <typename T>
class TapeT {
   public:
    void record(std::function<void()> node) { nodes_.push_back(std::move(node)); }

    void backward(TensorT<T>& loss) {
        if (consumed_)
            throw ConfigError("backward: tape already consumed; run a new forward pass");
        if (loss.size() != 1) throw ConfigError("backward: loss must be scalar");
        ensure_grad(loss);
        (*loss.grad)[0] = T(1);
        for (size_t i = nodes_.size(); i-- > 0;) {
            nodes_[i]();
            nodes_[i] = nullptr;
        }
        consumed_ = true;
    }

    void reset() {
        nodes_.clear();
        consumed_ = false;
    }

    size_t size() const { return nodes_.size(); }

   private:
    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

using Tensor = TensorT<float>;
using Tape = TapeT<float>;

namespace detail {

/// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
          const float* a, int lda, const float* b, int ldb, float beta, float* c,
          int ldc);
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, int lda, const double* b, int ldb, double beta,
          double* c, int ldc);

template <typename T>
void im2col3(const T* x, int channels, int height, int width, T* col) {
    const int hw = height * width;
    for (int c = 0; c < channels; ++c) {
        for (int kr = 0; kr < 3; ++kr) {
            for (int kc = 0; kc < 3; ++kc) {
                T* dst = col + ((c * 9 + kr * 3 + kc) * hw);
                const int dr = kr - 1;
                const int dc = kc - 1;
                for (int h = 0; h < height; ++h) {
                    const int sh = h + dr;
                    if (sh < 0 || sh >= height) {
                        std::fill(dst + h * width, dst + (h + 1) * width, T(0));
                        continue;
                    }
                    const T* src = x + (c * height + sh) * width;
                    for (int w = 0; w < width; ++w) {
                        const int sw = w + dc;
                        dst[h * width + w] =
                            (sw < 0 || sw >= width) ? T(0) : src[sw];
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im3_add(const T* col, int channels, int height, int width, T* x) {
    const int hw = height * width;
    for (int c = 0; c < channels; ++c) {
        for (int kr = 0; kr < 3; ++kr) {
            for (int kc = 0; kc < 3; ++kc) {
                const T* src = col + ((c * 9 + kr * 3 + kc) * hw);
                const int dr = kr - 1;
                const int dc = kc - 1;
                for (int h = 0; h < height; ++h) {
                    const int sh = h + dr;
                    if (sh < 0 || sh >= height) continue;
                    T* dst = x + (c * height + sh) * width;
                    for (int w = 0; w < width; ++w) {
                        const int sw = w + dc;
                        if (sw >= 0 && sw < width) dst[sw] += src[h * width + w];
                    }
                }
            }
        }
    }
}

template <typename T>
bool any_requires(std::initializer_list<const TensorT<T>*> ts) {
    for (const auto* t : ts)
        if (t->requires_grad) return true;
    return false;
}

}  // namespace detail

/// 3x3, stride 1, padding 1 cross-correlation plus per-filter bias.
/// x: [N,C,H,W], w: [K,C,3,3], b: [K] -> [N,K,H,W].
template <typename T>
TensorT<T> conv2d(TapeT<T>& tape, const TensorT<T>& x, const TensorT<T>& w,
                  const TensorT<T>& b) {
    if (x.rank() != 4 || w.rank() != 4 || b.rank() != 1)
        throw ConfigError("conv2d: expected x[N,C,H,W], w[K,C,3,3], b[K]");
    if (w.dim(2) != 3 || w.dim(3) != 3)
        throw ConfigError("conv2d: kernel must be 3x3");
    if (w.dim(1) != x.dim(1))
        throw ConfigError("conv2d: channel mismatch between input and kernel");
    if (b.dim(0) != w.dim(0))
        throw ConfigError("conv2d: bias size must match filter count");

    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int k = w.dim(0);
    const int hw = h * wd;
    const int c9 = c * 9;

    TensorT<T> y = make_tensor<T>({n, k, h, wd});
    std::vector<T> col(static_cast<size_t>(c9) * hw);
    for (int i = 0; i < n; ++i) {
        detail::im2col3(x.ptr() + static_cast<size_t>(i) * c * hw, c, h, wd,
                        col.data());
        T* yi = y.ptr() + static_cast<size_t>(i) * k * hw;
        detail::gemm(false, false, k, hw, c9, T(1), w.ptr(), c9, col.data(), hw,
                     T(0), yi, hw);
        for (int f = 0; f < k; ++f) {
            const T bias = (*b.data)[f];
            T* row = yi + static_cast<size_t>(f) * hw;
            for (int p = 0; p < hw; ++p) row[p] += bias;
        }
    }

    if (detail::any_requires<T>({&x, &w, &b})) {
        y.requires_grad = true;
        TensorT<T> xc = x, wc = w, bc = b, yc = y;
        tape.record([xc, wc, bc, yc, n, c, h, wd, k, hw, c9]() mutable {
            if (!yc.has_grad()) return;
            std::vector<T> col(static_cast<size_t>(c9) * hw);
            if (xc.requires_grad) ensure_grad(xc);
            if (wc.requires_grad) ensure_grad(wc);
            if (bc.requires_grad) ensure_grad(bc);
            std::vector<T> dcol(static_cast<size_t>(c9) * hw);
            for (int i = 0; i < n; ++i) {
                const T* dyi = yc.gptr() + static_cast<size_t>(i) * k * hw;
                if (xc.requires_grad) {
                    detail::gemm(true, false, c9, hw, k, T(1), wc.ptr(), c9, dyi,
                                 hw, T(0), dcol.data(), hw);
                    detail::col2im3_add(dcol.data(), c, h, wd,
                                        xc.gptr() + static_cast<size_t>(i) * c * hw);
                }
                if (wc.requires_grad) {
                    detail::im2col3(xc.ptr() + static_cast<size_t>(i) * c * hw, c,
                                    h, wd, col.data());
                    detail::gemm(false, true, k, c9, hw, T(1), dyi, hw, col.data(),
                                 hw, T(1), wc.gptr(), c9);
                }
                if (bc.requires_grad) {
                    for (int f = 0; f < k; ++f) {
                        T acc = T(0);
                        const T* row = dyi + static_cast<size_t>(f) * hw;
                        for (int p = 0; p < hw; ++p) acc += row[p];
                        (*bc.grad)[f] += acc;
                    }
                }
            }
        });
    }
    return y;
}

/// Pointwise (1x1) convolution: x[N,C,H,W], w[K,C], b[K] -> [N,K,H,W].
template <typename T>
TensorT<T> conv1x1(TapeT<T>& tape, const TensorT<T>& x, const TensorT<T>& w,
                   const TensorT<T>& b) {
    if (x.rank() != 4 || w.rank() != 2 || b.rank() != 1)
        throw ConfigError("conv1x1: expected x[N,C,H,W], w[K,C], b[K]");
    if (w.dim(1) != x.dim(1))
        throw ConfigError("conv1x1: channel mismatch between input and kernel");
    if (b.dim(0) != w.dim(0))
        throw ConfigError("conv1x1: bias size must match filter count");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int k = w.dim(0);
    const int hw = h * wd;
    TensorT<T> y = make_tensor<T>({n, k, h, wd});
    for (int i = 0; i < n; ++i) {
        T* yi = y.ptr() + static_cast<size_t>(i) * k * hw;
        detail::gemm(false, false, k, hw, c, T(1), w.ptr(), c,
                     x.ptr() + static_cast<size_t>(i) * c * hw, hw, T(0), yi, hw);
        for (int f = 0; f < k; ++f) {
            const T bias = (*b.data)[f];
            T* row = yi + static_cast<size_t>(f) * hw;
            for (int p = 0; p < hw; ++p) row[p] += bias;
        }
    }
    if (detail::any_requires<T>({&x, &w, &b})) {
        y.requires_grad = true;
        TensorT<T> xc = x, wc = w, bc = b, yc = y;
        tape.record([xc, wc, bc, yc, n, c, k, hw]() mutable {
            if (!yc.has_grad()) return;
            if (xc.requires_grad) ensure_grad(xc);
            if (wc.requires_grad) ensure_grad(wc);
            if (bc.requires_grad) ensure_grad(bc);
            for (int i = 0; i < n; ++i) {
                const T* dyi = yc.gptr() + static_cast<size_t>(i) * k * hw;
                if (xc.requires_grad)
                    detail::gemm(true, false, c, hw, k, T(1), wc.ptr(), c, dyi, hw,
                                 T(1), xc.gptr() + static_cast<size_t>(i) * c * hw,
                                 hw);
                if (wc.requires_grad)
                    detail::gemm(false, true, k, c, hw, T(1), dyi, hw,
                                 xc.ptr() + static_cast<size_t>(i) * c * hw, hw,
                                 T(1), wc.gptr(), c);
                if (bc.requires_grad) {
                    for (int f = 0; f < k; ++f) {
                        T acc = T(0);
                        const T* row = dyi + static_cast<size_t>(f) * hw;
                        for (int p = 0; p < hw; ++p) acc += row[p];
                        (*bc.grad)[f] += acc;
                    }
                }
            }
        });
    }
    return y;
}

/// Per-channel running statistics owned by a batchnorm layer.
template <typename T>
struct BatchNormState {
    std::vector<T> running_mean;
    std::vector<T> running_var;

    explicit BatchNormState(int channels = 0)
        : running_mean(channels, T(0)), running_var(channels, T(1)) {}
};

/// Batch normalization over N,H,W per channel; epsilon 1e-5. Train mode uses
/// batch statistics and refreshes the running ones (momentum 0.1, unbiased
/// variance); eval mode normalizes with the stored running statistics.
template <typename T>
TensorT<T> batchnorm2d(TapeT<T>& tape, const TensorT<T>& x, const TensorT<T>& gamma,
                       const TensorT<T>& beta, BatchNormState<T>& state, bool train,
                       double momentum = 0.1, double eps = 1e-5) {
    if (x.rank() != 4) throw ConfigError("batchnorm2d: expected x[N,C,H,W]");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (gamma.size() != static_cast<size_t>(c) || beta.size() != static_cast<size_t>(c) ||
        state.running_mean.size() != static_cast<size_t>(c))
        throw ConfigError("batchnorm2d: channel mismatch");
    const int hw = h * w;
    const size_t chw = static_cast<size_t>(c) * hw;
    const double m = static_cast<double>(n) * hw;

    std::vector<T> mean(c), invstd(c);
    if (train) {
        for (int ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const T* p = x.ptr() + i * chw + static_cast<size_t>(ch) * hw;
                for (int q = 0; q < hw; ++q) acc += p[q];
            }
            const double mu = acc / m;
            double var = 0.0;
            for (int i = 0; i < n; ++i) {
                const T* p = x.ptr() + i * chw + static_cast<size_t>(ch) * hw;
                for (int q = 0; q < hw; ++q) {
                    const double d = p[q] - mu;
                    var += d * d;
                }
            }
            var /= m;
            mean[ch] = static_cast<T>(mu);
            invstd[ch] = static_cast<T>(1.0 / std::sqrt(var + eps));
            const double unbiased = m > 1.0 ? var * m / (m - 1.0) : var;
            state.running_mean[ch] = static_cast<T>((1.0 - momentum) * state.running_mean[ch] +
                                                    momentum * mu);
            state.running_var[ch] = static_cast<T>((1.0 - momentum) * state.running_var[ch] +
                                                   momentum * unbiased);
        }
    } else {
        for (int ch = 0; ch < c; ++ch) {
            mean[ch] = state.running_mean[ch];
            invstd[ch] =
                static_cast<T>(1.0 / std::sqrt(static_cast<double>(state.running_var[ch]) + eps));
        }
    }

    TensorT<T> y = make_tensor<T>({n, c, h, w});
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const T* p = x.ptr() + i * chw + static_cast<size_t>(ch) * hw;
            T* q = y.ptr() + i * chw + static_cast<size_t>(ch) * hw;
            const T mu = mean[ch], is = invstd[ch];
            const T g = (*gamma.data)[ch], bt = (*beta.data)[ch];
            for (int s = 0; s < hw; ++s) q[s] = (p[s] - mu) * is * g + bt;
        }
    }

    if (detail::any_requires<T>({&x, &gamma, &beta})) {
        y.requires_grad = true;
        TensorT<T> xc = x, gc = gamma, bc = beta, yc = y;
        tape.record([xc, gc, bc, yc, mean, invstd, train, n, c, hw, chw, m]() mutable {
            if (!yc.has_grad()) return;
            if (xc.requires_grad) ensure_grad(xc);
            if (gc.requires_grad) ensure_grad(gc);
            if (bc.requires_grad) ensure_grad(bc);
            for (int ch = 0; ch < c; ++ch) {
                const T mu = mean[ch], is = invstd[ch];
                const T g = (*gc.data)[ch];
                double sum_dy = 0.0, sum_dy_xhat = 0.0;
                for (int i = 0; i < n; ++i) {
                    const T* dy = yc.gptr() + i * chw + static_cast<size_t>(ch) * hw;
                    const T* px = xc.ptr() + i * chw + static_cast<size_t>(ch) * hw;
                    for (int s = 0; s < hw; ++s) {
                        sum_dy += dy[s];
                        sum_dy_xhat += static_cast<double>(dy[s]) * (px[s] - mu) * is;
                    }
                }
                if (gc.requires_grad) (*gc.grad)[ch] += static_cast<T>(sum_dy_xhat);
                if (bc.requires_grad) (*bc.grad)[ch] += static_cast<T>(sum_dy);
                if (!xc.requires_grad) continue;
                for (int i = 0; i < n; ++i) {
                    const T* dy = yc.gptr() + i * chw + static_cast<size_t>(ch) * hw;
                    const T* px = xc.ptr() + i * chw + static_cast<size_t>(ch) * hw;
                    T* dx = xc.gptr() + i * chw + static_cast<size_t>(ch) * hw;
                    for (int s = 0; s < hw; ++s) {
                        if (train) {
                            const double xhat = (px[s] - mu) * is;
                            dx[s] += static_cast<T>(
                                g * is * (dy[s] - sum_dy / m - xhat * sum_dy_xhat / m));
                        } else {
                            dx[s] += static_cast<T>(g * is * dy[s]);
                        }
                    }
                }
            }
        });
    }
    return y;
}

template <typename T>
TensorT<T> relu(TapeT<T>& tape, const TensorT<T>& x) {
    TensorT<T> y = make_tensor<T>(x.shape);
    for (size_t i = 0; i < x.size(); ++i)
        (*y.data)[i] = (*x.data)[i] > T(0) ? (*x.data)[i] : T(0);
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            for (size_t i = 0; i < xc.size(); ++i)
                if ((*xc.data)[i] > T(0)) (*xc.grad)[i] += (*yc.grad)[i];
        });
    }
    return y;
}

/// Inverted dropout: train mode zeroes with probability p and scales
/// survivors by 1/(1-p); eval mode passes through. p in [0, 1).
template <typename T>
TensorT<T> dropout(TapeT<T>& tape, const TensorT<T>& x, double p, bool train,
                   uint64_t seed) {
    if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: p must lie in [0, 1)");
    if (!train || p == 0.0) {
        TensorT<T> y = make_tensor<T>(x.shape);
        *y.data = *x.data;
        if (x.requires_grad) {
            y.requires_grad = true;
            TensorT<T> xc = x, yc = y;
            tape.record([xc, yc]() mutable {
                if (!yc.has_grad()) return;
                ensure_grad(xc);
                for (size_t i = 0; i < xc.size(); ++i) (*xc.grad)[i] += (*yc.grad)[i];
            });
        }
        return y;
    }
    Rng rng(seed);
    auto mask = std::make_shared<std::vector<uint8_t>>(x.size());
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    TensorT<T> y = make_tensor<T>(x.shape);
    for (size_t i = 0; i < x.size(); ++i) {
        const bool keep = rng.uniform() >= p;
        (*mask)[i] = keep;
        (*y.data)[i] = keep ? (*x.data)[i] * scale : T(0);
    }
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc, mask, scale]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            for (size_t i = 0; i < xc.size(); ++i)
                if ((*mask)[i]) (*xc.grad)[i] += (*yc.grad)[i] * scale;
        });
    }
    return y;
}

/// 2x2 max pooling with stored argmax positions; ties break toward the
/// smallest flat index. H and W must be even.
template <typename T>
std::pair<TensorT<T>, PoolIndices> maxpool2(TapeT<T>& tape, const TensorT<T>& x) {
    if (x.rank() != 4) throw ConfigError("maxpool2: expected x[N,C,H,W]");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0)
        throw ConfigError("maxpool2: spatial extents must be even");
    const int oh = h / 2, ow = w / 2;
    TensorT<T> y = make_tensor<T>({n, c, oh, ow});
    PoolIndices pi;
    pi.idx.resize(y.size());
    pi.in_shape = {n, c, h, w};
    auto indices = std::make_shared<std::vector<int32_t>>();
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const size_t base = (static_cast<size_t>(i) * c + ch) * h * w;
            const size_t obase = (static_cast<size_t>(i) * c + ch) * oh * ow;
            for (int r = 0; r < oh; ++r) {
                for (int q = 0; q < ow; ++q) {
                    const size_t i00 = base + static_cast<size_t>(2 * r) * w + 2 * q;
                    size_t best = i00;
                    T vbest = (*x.data)[i00];
                    const size_t cand[3] = {i00 + 1, i00 + w, i00 + w + 1};
                    for (size_t cc : cand) {
                        if ((*x.data)[cc] > vbest) {
                            vbest = (*x.data)[cc];
                            best = cc;
                        }
                    }
                    (*y.data)[obase + static_cast<size_t>(r) * ow + q] = vbest;
                    pi.idx[obase + static_cast<size_t>(r) * ow + q] =
                        static_cast<int32_t>(best);
                }
            }
        }
    }
    *indices = pi.idx;
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc, indices]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            for (size_t i = 0; i < yc.size(); ++i)
                (*xc.grad)[(*indices)[i]] += (*yc.grad)[i];
        });
    }
    return {y, pi};
}

/// Scatter of pooled values back to their recorded argmax cells; everything
/// else is zero. Indices must address cells inside their own 2x2 window.
template <typename T>
TensorT<T> maxunpool2(TapeT<T>& tape, const TensorT<T>& x, const PoolIndices& pi) {
    if (x.rank() != 4) throw ConfigError("maxunpool2: expected x[N,C,H,W]");
    if (pi.in_shape.size() != 4) throw ConfigError("maxunpool2: bad indices shape");
    const int n = x.dim(0), c = x.dim(1), oh = x.dim(2), ow = x.dim(3);
    const int h = pi.in_shape[2], w = pi.in_shape[3];
    if (pi.in_shape[0] != n || pi.in_shape[1] != c || h != 2 * oh || w != 2 * ow ||
        pi.idx.size() != x.size())
        throw ConfigError("maxunpool2: indices do not match the input shape");
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const size_t base = (static_cast<size_t>(i) * c + ch) * h * w;
            const size_t obase = (static_cast<size_t>(i) * c + ch) * oh * ow;
            for (int r = 0; r < oh; ++r) {
                for (int q = 0; q < ow; ++q) {
                    const int32_t id = pi.idx[obase + static_cast<size_t>(r) * ow + q];
                    const size_t i00 = base + static_cast<size_t>(2 * r) * w + 2 * q;
                    const bool ok = id == static_cast<int32_t>(i00) ||
                                    id == static_cast<int32_t>(i00 + 1) ||
                                    id == static_cast<int32_t>(i00 + w) ||
                                    id == static_cast<int32_t>(i00 + w + 1);
                    if (!ok) throw ConfigError("maxunpool2: corrupt indices");
                }
            }
        }
    }
    TensorT<T> y = make_tensor<T>({n, c, h, w});
    auto indices = std::make_shared<std::vector<int32_t>>(pi.idx);
    for (size_t i = 0; i < x.size(); ++i) (*y.data)[(*indices)[i]] = (*x.data)[i];
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc, indices]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            for (size_t i = 0; i < xc.size(); ++i)
                (*xc.grad)[i] += (*yc.grad)[(*indices)[i]];
        });
    }
    return y;
}

template <typename T>
TensorT<T> concat_channels(TapeT<T>& tape, const TensorT<T>& a, const TensorT<T>& b) {
    if (a.rank() != 4 || b.rank() != 4)
        throw ConfigError("concat_channels: expected rank-4 inputs");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw ConfigError("concat_channels: N, H, W must match");
    const int n = a.dim(0), ca = a.dim(1), cb = b.dim(1), h = a.dim(2), w = a.dim(3);
    const size_t hw = static_cast<size_t>(h) * w;
    TensorT<T> y = make_tensor<T>({n, ca + cb, h, w});
    for (int i = 0; i < n; ++i) {
        std::copy(a.ptr() + i * ca * hw, a.ptr() + (i + 1) * ca * hw,
                  y.ptr() + static_cast<size_t>(i) * (ca + cb) * hw);
        std::copy(b.ptr() + i * cb * hw, b.ptr() + (i + 1) * cb * hw,
                  y.ptr() + static_cast<size_t>(i) * (ca + cb) * hw + ca * hw);
    }
    if (detail::any_requires<T>({&a, &b})) {
        y.requires_grad = true;
        TensorT<T> ac = a, bc = b, yc = y;
        tape.record([ac, bc, yc, n, ca, cb, hw]() mutable {
            if (!yc.has_grad()) return;
            if (ac.requires_grad) ensure_grad(ac);
            if (bc.requires_grad) ensure_grad(bc);
            for (int i = 0; i < n; ++i) {
                const T* dy = yc.gptr() + static_cast<size_t>(i) * (ca + cb) * hw;
                if (ac.requires_grad) {
                    T* da = ac.gptr() + static_cast<size_t>(i) * ca * hw;
                    for (size_t s = 0; s < static_cast<size_t>(ca) * hw; ++s)
                        da[s] += dy[s];
                }
                if (bc.requires_grad) {
                    T* db = bc.gptr() + static_cast<size_t>(i) * cb * hw;
                    for (size_t s = 0; s < static_cast<size_t>(cb) * hw; ++s)
                        db[s] += dy[ca * hw + s];
                }
            }
        });
    }
    return y;
}

/// Bilinear resampling with half-pixel centers and clamped edges.
template <typename T>
TensorT<T> bilinear_resize(TapeT<T>& tape, const TensorT<T>& x, int out_h, int out_w) {
    if (x.rank() != 4) throw ConfigError("bilinear_resize: expected x[N,C,H,W]");
    if (out_h < 1 || out_w < 1)
        throw ConfigError("bilinear_resize: output extents must be positive");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);

    struct Tap {
        int i0, i1;
        T f;
    };
    auto make_taps = [](int in, int out) {
        std::vector<Tap> taps(out);
        for (int o = 0; o < out; ++o) {
            double s = (o + 0.5) * in / out - 0.5;
            if (s < 0.0) s = 0.0;
            if (s > in - 1.0) s = in - 1.0;
            const int i0 = static_cast<int>(s);
            taps[o] = {i0, std::min(i0 + 1, in - 1), static_cast<T>(s - i0)};
        }
        return taps;
    };
    const auto rt = make_taps(h, out_h);
    const auto ct = make_taps(w, out_w);

    TensorT<T> y = make_tensor<T>({n, c, out_h, out_w});
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            const T* src = x.ptr() + (static_cast<size_t>(i) * c + ch) * h * w;
            T* dst = y.ptr() + (static_cast<size_t>(i) * c + ch) * out_h * out_w;
            for (int r = 0; r < out_h; ++r) {
                const auto& tr = rt[r];
                for (int q = 0; q < out_w; ++q) {
                    const auto& tc = ct[q];
                    const T v00 = src[tr.i0 * w + tc.i0];
                    const T v01 = src[tr.i0 * w + tc.i1];
                    const T v10 = src[tr.i1 * w + tc.i0];
                    const T v11 = src[tr.i1 * w + tc.i1];
                    dst[r * out_w + q] = (T(1) - tr.f) * ((T(1) - tc.f) * v00 + tc.f * v01) +
                                         tr.f * ((T(1) - tc.f) * v10 + tc.f * v11);
                }
            }
        }
    }
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc, rt, ct, n, c, h, w, out_h, out_w]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            for (int i = 0; i < n; ++i) {
                for (int ch = 0; ch < c; ++ch) {
                    T* dx = xc.gptr() + (static_cast<size_t>(i) * c + ch) * h * w;
                    const T* dy =
                        yc.gptr() + (static_cast<size_t>(i) * c + ch) * out_h * out_w;
                    for (int r = 0; r < out_h; ++r) {
                        const auto& tr = rt[r];
                        for (int q = 0; q < out_w; ++q) {
                            const auto& tc = ct[q];
                            const T g = dy[r * out_w + q];
                            dx[tr.i0 * w + tc.i0] += (T(1) - tr.f) * (T(1) - tc.f) * g;
                            dx[tr.i0 * w + tc.i1] += (T(1) - tr.f) * tc.f * g;
                            dx[tr.i1 * w + tc.i0] += tr.f * (T(1) - tc.f) * g;
                            dx[tr.i1 * w + tc.i1] += tr.f * tc.f * g;
                        }
                    }
                }
            }
        });
    }
    return y;
}

/// Softmax across the channel axis, per (n, h, w) pixel.
template <typename T>
TensorT<T> softmax_channels(TapeT<T>& tape, const TensorT<T>& x) {
    if (x.rank() != 4) throw ConfigError("softmax_channels: expected x[N,C,H,W]");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const size_t hw = static_cast<size_t>(h) * w;
    TensorT<T> y = make_tensor<T>(x.shape);
    for (int i = 0; i < n; ++i) {
        const T* px = x.ptr() + static_cast<size_t>(i) * c * hw;
        T* py = y.ptr() + static_cast<size_t>(i) * c * hw;
        for (size_t s = 0; s < hw; ++s) {
            T vmax = px[s];
            for (int ch = 1; ch < c; ++ch) vmax = std::max(vmax, px[ch * hw + s]);
            T denom = T(0);
            for (int ch = 0; ch < c; ++ch) {
                const T e = std::exp(px[ch * hw + s] - vmax);
                py[ch * hw + s] = e;
                denom += e;
            }
            for (int ch = 0; ch < c; ++ch) py[ch * hw + s] /= denom;
        }
    }
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc, n, c, hw]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            for (int i = 0; i < n; ++i) {
                const T* py = yc.ptr() + static_cast<size_t>(i) * c * hw;
                const T* dy = yc.gptr() + static_cast<size_t>(i) * c * hw;
                T* dx = xc.gptr() + static_cast<size_t>(i) * c * hw;
                for (size_t s = 0; s < hw; ++s) {
                    T dot = T(0);
                    for (int ch = 0; ch < c; ++ch)
                        dot += dy[ch * hw + s] * py[ch * hw + s];
                    for (int ch = 0; ch < c; ++ch)
                        dx[ch * hw + s] +=
                            py[ch * hw + s] * (dy[ch * hw + s] - dot);
                }
            }
        });
    }
    return y;
}

// --- small generic ops used by losses and tests ---

template <typename T>
TensorT<T> add(TapeT<T>& tape, const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape != b.shape) throw ConfigError("add: shape mismatch");
    TensorT<T> y = make_tensor<T>(a.shape);
    for (size_t i = 0; i < a.size(); ++i) (*y.data)[i] = (*a.data)[i] + (*b.data)[i];
    if (detail::any_requires<T>({&a, &b})) {
        y.requires_grad = true;
        TensorT<T> ac = a, bc = b, yc = y;
        tape.record([ac, bc, yc]() mutable {
            if (!yc.has_grad()) return;
            if (ac.requires_grad) {
                ensure_grad(ac);
                for (size_t i = 0; i < ac.size(); ++i) (*ac.grad)[i] += (*yc.grad)[i];
            }
            if (bc.requires_grad) {
                ensure_grad(bc);
                for (size_t i = 0; i < bc.size(); ++i) (*bc.grad)[i] += (*yc.grad)[i];
            }
        });
    }
    return y;
}

template <typename T>
TensorT<T> mul(TapeT<T>& tape, const TensorT<T>& a, const TensorT<T>& b) {
    if (a.shape != b.shape) throw ConfigError("mul: shape mismatch");
    TensorT<T> y = make_tensor<T>(a.shape);
    for (size_t i = 0; i < a.size(); ++i) (*y.data)[i] = (*a.data)[i] * (*b.data)[i];
    if (detail::any_requires<T>({&a, &b})) {
        y.requires_grad = true;
        TensorT<T> ac = a, bc = b, yc = y;
        tape.record([ac, bc, yc]() mutable {
            if (!yc.has_grad()) return;
            if (ac.requires_grad) {
                ensure_grad(ac);
                for (size_t i = 0; i < ac.size(); ++i)
                    (*ac.grad)[i] += (*yc.grad)[i] * (*bc.data)[i];
            }
            if (bc.requires_grad) {
                ensure_grad(bc);
                for (size_t i = 0; i < bc.size(); ++i)
                    (*bc.grad)[i] += (*yc.grad)[i] * (*ac.data)[i];
            }
        });
    }
    return y;
}

template <typename T>
TensorT<T> scale(TapeT<T>& tape, const TensorT<T>& x, T s) {
    TensorT<T> y = make_tensor<T>(x.shape);
    for (size_t i = 0; i < x.size(); ++i) (*y.data)[i] = (*x.data)[i] * s;
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc, s]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            for (size_t i = 0; i < xc.size(); ++i) (*xc.grad)[i] += (*yc.grad)[i] * s;
        });
    }
    return y;
}

template <typename T>
TensorT<T> sum(TapeT<T>& tape, const TensorT<T>& x) {
    TensorT<T> y = make_tensor<T>({1});
    T acc = T(0);
    for (size_t i = 0; i < x.size(); ++i) acc += (*x.data)[i];
    (*y.data)[0] = acc;
    if (x.requires_grad) {
        y.requires_grad = true;
        TensorT<T> xc = x, yc = y;
        tape.record([xc, yc]() mutable {
            if (!yc.has_grad()) return;
            ensure_grad(xc);
            const T g = (*yc.grad)[0];
            for (size_t i = 0; i < xc.size(); ++i) (*xc.grad)[i] += g;
        });
    }
    return y;
}

/// Per-pixel argmax over the class channel of a [1,C,H,W] or [N,C,H,W]
/// probability tensor; returns one GridU8 per batch element concatenated
/// row-wise is not useful, so this takes the batch index explicitly.
template <typename T>
GridU8 argmax_channels(const TensorT<T>& probs, int batch_index = 0) {
    if (probs.rank() != 4) throw ConfigError("argmax_channels: expected [N,C,H,W]");
    const int c = probs.dim(1), h = probs.dim(2), w = probs.dim(3);
    if (batch_index < 0 || batch_index >= probs.dim(0))
        throw ConfigError("argmax_channels: batch index out of range");
    const size_t hw = static_cast<size_t>(h) * w;
    const T* p = probs.ptr() + static_cast<size_t>(batch_index) * c * hw;
    GridU8 out(h, w);
    for (size_t s = 0; s < hw; ++s) {
        int best = 0;
        T vbest = p[s];
        for (int ch = 1; ch < c; ++ch) {
            if (p[ch * hw + s] > vbest) {
                vbest = p[ch * hw + s];
                best = ch;
            }
        }
        out.data()[s] = static_cast<uint8_t>(best);
    }
    return out;
}

// --- optimizer ---

struct AdamConfig {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

template <typename T>
struct AdamState {
    std::vector<std::vector<T>> m;
    std::vector<std::vector<T>> v;
    int64_t t = 0;
};

/// One Adam update with bias correction. Weight decay enters as an L2
/// gradient term lambda * w added before the moment update. Parameters with
/// no gradient buffer are treated as zero-gradient (decay still applies).
template <typename T>
void adam_step(std::vector<TensorT<T>*>& params, AdamState<T>& state,
               const AdamConfig& cfg) {
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (size_t p = 0; p < params.size(); ++p) {
            state.m[p].assign(params[p]->size(), T(0));
            state.v[p].assign(params[p]->size(), T(0));
        }
    }
    if (state.m.size() != params.size())
        throw ConfigError("adam_step: optimizer state does not match parameter list");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (size_t p = 0; p < params.size(); ++p) {
        TensorT<T>& w = *params[p];
        if (state.m[p].size() != w.size())
            throw ConfigError("adam_step: parameter shape changed under the optimizer");
        for (size_t i = 0; i < w.size(); ++i) {
            const double g =
                (w.has_grad() ? static_cast<double>((*w.grad)[i]) : 0.0) +
                cfg.weight_decay * static_cast<double>((*w.data)[i]);
            const double m = cfg.beta1 * state.m[p][i] + (1.0 - cfg.beta1) * g;
            const double v = cfg.beta2 * state.v[p][i] + (1.0 - cfg.beta2) * g * g;
            state.m[p][i] = static_cast<T>(m);
            state.v[p][i] = static_cast<T>(v);
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            (*w.data)[i] =
                static_cast<T>((*w.data)[i] - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
        }
    }
}

}  // namespace gprseg
