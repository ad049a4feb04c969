#include "gprseg/metrics.hpp"

#include <cmath>
#include <limits>

namespace gprseg {

void accumulate_confusion(ConfusionMatrix& cm, const GridU8& pred, const GridU8& truth) {
    accumulate_confusion(cm, pred, truth, 0, pred.rows(), 0, pred.cols());
}

void accumulate_confusion(ConfusionMatrix& cm, const GridU8& pred, const GridU8& truth,
                          int row_lo, int row_hi, int col_lo, int col_hi) {
    if (!pred.same_shape(truth))
        throw ConfigError("accumulate_confusion: shape mismatch");
    if (row_lo < 0 || col_lo < 0 || row_hi > pred.rows() || col_hi > pred.cols() ||
        row_lo > row_hi || col_lo > col_hi)
        throw ConfigError("accumulate_confusion: scored rectangle out of range");
    for (int r = row_lo; r < row_hi; ++r) {
        for (int c = col_lo; c < col_hi; ++c) {
            const int t = truth(r, c);
            const int p = pred(r, c);
            if (t >= ConfusionMatrix::kClasses || p >= ConfusionMatrix::kClasses)
                throw ConfigError("accumulate_confusion: class id out of range");
            ++cm.at(t, p);
        }
    }
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
    const int64_t total = cm.total();
    if (total == 0) throw ConfigError("compute_metrics: empty confusion matrix");
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    constexpr int k = ConfusionMatrix::kClasses;

    Metrics out;
    double mpa_sum = 0.0, miou_sum = 0.0, fwiou = 0.0;
    int mpa_n = 0, miou_n = 0;
    for (int c = 0; c < k; ++c) {
        const double tp = static_cast<double>(cm.at(c, c));
        double row = 0.0, col = 0.0;
        for (int j = 0; j < k; ++j) {
            row += static_cast<double>(cm.at(c, j));
            col += static_cast<double>(cm.at(j, c));
        }
        const double fn = row - tp;
        const double fp = col - tp;

        out.pa[c] = row > 0.0 ? tp / row : nan;
        out.iou[c] = (tp + fp + fn) > 0.0 ? tp / (tp + fp + fn) : nan;
        out.precision[c] = (tp + fp) > 0.0 ? tp / (tp + fp) : nan;
        out.recall[c] = out.pa[c];
        if (std::isnan(out.precision[c]) || std::isnan(out.recall[c]) ||
            out.precision[c] + out.recall[c] == 0.0)
            out.f_measure[c] = nan;
        else
            out.f_measure[c] = 2.0 * out.precision[c] * out.recall[c] /
                               (out.precision[c] + out.recall[c]);

        if (!std::isnan(out.pa[c])) {
            mpa_sum += out.pa[c];
            ++mpa_n;
        }
        if (!std::isnan(out.iou[c])) {
            miou_sum += out.iou[c];
            ++miou_n;
        }
        if (row > 0.0) fwiou += (row / static_cast<double>(total)) * out.iou[c];
    }
    out.mpa = mpa_n > 0 ? mpa_sum / mpa_n : 0.0;
    out.miou = miou_n > 0 ? miou_sum / miou_n : 0.0;
    out.fwiou = fwiou;
    return out;
}

}  // namespace gprseg
