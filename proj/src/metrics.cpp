#include "ebr/metrics.hpp"

#include <cmath>
#include <limits>

namespace ebr {

ConfusionCounts confusion(const BinaryFrame& prediction, const BinaryFrame& truth) {
    if (prediction.width != truth.width || prediction.height != truth.height)
        throw DimensionMismatch("prediction and ground truth differ in shape");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.bits.size(); ++i) {
        const bool p = prediction.bits[i] != 0;
        const bool g = truth.bits[i] != 0;
        if (p && g)
            ++c.tp;
        else if (!p && !g)
            ++c.tn;
        else if (p)
            ++c.fp;
        else
            ++c.fn;
    }
    return c;
}

double mcc(const ConfusionCounts& c) {
    const double tp = double(c.tp), tn = double(c.tn), fp = double(c.fp), fn = double(c.fn);
    const double f1 = tp + fp, f2 = tp + fn, f3 = tn + fp, f4 = tn + fn;
    if (f1 == 0.0 || f2 == 0.0 || f3 == 0.0 || f4 == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(f1 * f2 * f3 * f4);
}

double psnr(const ConfusionCounts& c) {
    const std::uint64_t wrong = c.fp + c.fn;
    if (c.total() == 0) throw EmptyDomain("confusion counts are empty");
    if (wrong == 0) return std::numeric_limits<double>::infinity();
    const double mse = double(wrong) / double(c.total());
    return 10.0 * std::log10(1.0 / mse);
}

double nrm(const ConfusionCounts& c) {
    const double miss = (c.tp + c.fn) == 0 ? 0.0 : double(c.fn) / double(c.tp + c.fn);
    const double ghost = (c.tn + c.fp) == 0 ? 0.0 : double(c.fp) / double(c.tn + c.fp);
    return 0.5 * (miss + ghost);
}

}  // namespace ebr
