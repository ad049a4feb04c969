#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gprseg/tensor.hpp"

namespace testutil {

using DT = gprseg::TensorT<double>;
using DTape = gprseg::TapeT<double>;

inline DT random_tensor(std::vector<int> shape, gprseg::Rng& rng, double lo = -1.0,
                        double hi = 1.0) {
    DT t = gprseg::make_tensor<double>(std::move(shape));
    for (auto& v : *t.data) v = rng.uniform(lo, hi);
    return t;
}

struct CheckResult {
    int total = 0;
    int ok = 0;
    double worst = 0.0;
};

/// Compares reverse-mode gradients of a scalar-valued forward function
/// against central finite differences (h = 1e-5) for every coordinate of
/// every listed parameter. make_loss must be deterministic and read its
/// tensors through the captured pointers so perturbations are visible.
template <typename MakeLoss>
CheckResult gradcheck(std::vector<DT*> params, MakeLoss make_loss) {
    for (auto* p : params) {
        p->requires_grad = true;
        gprseg::ensure_grad(*p);
        gprseg::zero_grad(*p);
    }
    DTape tape;
    DT loss = make_loss(tape);
    tape.backward(loss);
    std::vector<std::vector<double>> ad;
    for (auto* p : params) ad.push_back(*p->grad);

    CheckResult res;
    const double h = 1e-5;
    for (size_t k = 0; k < params.size(); ++k) {
        auto& vals = *params[k]->data;
        for (size_t i = 0; i < vals.size(); ++i) {
            const double save = vals[i];
            vals[i] = save + h;
            DTape tp;
            const double lp = (*make_loss(tp).data)[0];
            vals[i] = save - h;
            DTape tm;
            const double lm = (*make_loss(tm).data)[0];
            vals[i] = save;
            const double fd = (lp - lm) / (2.0 * h);
            const double a = ad[k][i];
            const double rel =
                std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-4});
            ++res.total;
            if (rel < 1e-4) ++res.ok;
            res.worst = std::max(res.worst, rel);
        }
    }
    return res;
}

/// Scalar readout: weighted sum of the output with fixed random weights so
/// every output coordinate influences the loss.
inline DT weighted_sum(DTape& tape, const DT& y, const DT& weights) {
    return gprseg::sum(tape, gprseg::mul(tape, y, weights));
}

}  // namespace testutil
