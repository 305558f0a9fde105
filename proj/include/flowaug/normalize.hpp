#pragma once

#include <array>
#include <cmath>

#include "flowaug/flow.hpp"
#include "flowaug/stats.hpp"

namespace flowaug {

// Model-ready view of one flow; every entry lies in [0, 1].
struct NormalizedTensor {
    std::array<std::array<double, kSeqLen>, kFeatures> values{};

    double& at(int d, int t) { return values[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)]; }
    double at(int d, int t) const { return values[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)]; }
};

// size: clip [0,1460] then min-max; iat: clip [1e-7, q99], log10, min-max;
// dir: {-1,0,+1} -> {0, 0.5, 1} (padding lands mid-range).
inline NormalizedTensor normalize(const FlowTensor& x, const ClassStats& stats) {
    if (stats.q_iat_99 <= kIatFloor)
        throw DataError("q_iat_99 must exceed the IAT clip floor");
    const double log_lo = std::log10(kIatFloor);
    const double log_hi = std::log10(stats.q_iat_99);
    NormalizedTensor out;
    for (int t = 0; t < kSeqLen; ++t) {
        out.at(kFeatSize, t) = clip(x.at(kFeatSize, t), 0.0, kMaxPktSize) / kMaxPktSize;
        out.at(kFeatDir, t) = (clip(x.at(kFeatDir, t), -1.0, 1.0) + 1.0) / 2.0;
        const double iat = clip(x.at(kFeatIat, t), kIatFloor, stats.q_iat_99);
        out.at(kFeatIat, t) = (std::log10(iat) - log_lo) / (log_hi - log_lo);
    }
    return out;
}

}  // namespace flowaug
