#pragma once

#include "ebr/core.hpp"

namespace ebr {

// Binary confusion counts with 1 as the positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
};

ConfusionCounts confusion(const BinaryFrame& prediction, const BinaryFrame& truth);

// Matthews correlation coefficient; 0 when any marginal factor is zero.
double mcc(const ConfusionCounts& c);

// 10*log10(1/MSE) with MSE = (fp+fn)/total. +infinity when every pixel
// matches; callers print that as "inf".
double psnr(const ConfusionCounts& c);

// Mean of the two negative rates fn/(tp+fn) and fp/(tn+fp); a rate with an
// empty denominator contributes 0. Lower is better.
double nrm(const ConfusionCounts& c);

}  // namespace ebr
