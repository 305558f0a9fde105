#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "flowaug/flow.hpp"
#include "flowaug/rng.hpp"

namespace flowaug {

// Synthetic flow generator for desk-scale experiments. Each class owns a
// template process: piecewise-constant packet-size levels, alternating
// direction bursts, and a log-normal IAT scale (stratified across classes
// so tasks stay learnable). Per-flow deviations all scale with `jitter`;
// jitter = 0 reproduces the template exactly.
struct SynthSpec {
    int n_classes = 5;
    std::vector<int> flows_per_class;  // one entry per class
    double jitter = 1.0;
    std::uint64_t seed = 0;
};

inline double imbalance_ratio(const std::vector<int>& flows_per_class) {
    const auto [lo, hi] = std::minmax_element(flows_per_class.begin(), flows_per_class.end());
    return static_cast<double>(*hi) / static_cast<double>(std::max(1, *lo));
}

namespace detail {

struct ClassTemplate {
    std::array<double, kSeqLen> size_level{};
    std::array<double, kSeqLen> dir{};
    double iat_log_mean = 0.0;
    double iat_log_std = 0.0;
    int base_len = kSeqLen;
};

inline ClassTemplate make_template(RngStream rng, int class_idx, int n_classes) {
    ClassTemplate tpl;
    const int n_seg = static_cast<int>(rng.uniform_int(2, 4));
    std::vector<int> cuts = rng.sample_distinct(kSeqLen - 1, n_seg - 1);
    for (int& c : cuts) ++c;  // cut positions in 1..19
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(kSeqLen);
    int start = 0;
    for (int cut : cuts) {
        const double level = rng.uniform(100.0, 1400.0);
        for (int t = start; t < cut; ++t) tpl.size_level[static_cast<std::size_t>(t)] = level;
        start = cut;
    }
    const int burst = static_cast<int>(rng.uniform_int(1, 4));
    for (int t = 0; t < kSeqLen; ++t)
        tpl.dir[static_cast<std::size_t>(t)] = ((t / burst) % 2 == 0) ? 1.0 : -1.0;

    // IAT scales stratified per class so no two classes share a time scale
    const double lo = std::log(1e-4), hi = std::log(0.2);
    const double slot = (hi - lo) / n_classes;
    tpl.iat_log_mean = lo + slot * (class_idx + rng.uniform(0.25, 0.75));
    tpl.iat_log_std = rng.uniform(0.2, 0.6);
    tpl.base_len = static_cast<int>(rng.uniform_int(13, kSeqLen));
    return tpl;
}

}  // namespace detail

inline std::vector<FlowTensor> synth_generate(const SynthSpec& spec) {
    if (spec.n_classes < 2) throw DataError("synthetic dataset needs at least 2 classes");
    if (static_cast<int>(spec.flows_per_class.size()) != spec.n_classes)
        throw DataError("flows_per_class length must equal n_classes");

    RngStream base(spec.seed);
    std::vector<FlowTensor> out;
    for (int y = 0; y < spec.n_classes; ++y) {
        const auto tpl = detail::make_template(base.fork("template", static_cast<std::uint64_t>(y)),
                                               y, spec.n_classes);
        char label[24];
        std::snprintf(label, sizeof(label), "class_%02d", y);
        const int n_flows = spec.flows_per_class[static_cast<std::size_t>(y)];
        for (int i = 0; i < n_flows; ++i) {
            RngStream rng = base.fork("flow", static_cast<std::uint64_t>(y))
                                .fork(static_cast<std::uint64_t>(i));
            const int len = static_cast<int>(
                clip(tpl.base_len + std::lround(spec.jitter * rng.gaussian()), 11, kSeqLen));
            std::vector<double> size, dir, iat;
            for (int t = 0; t < len; ++t) {
                size.push_back(clip(tpl.size_level[static_cast<std::size_t>(t)] +
                                        spec.jitter * 25.0 * rng.gaussian(),
                                    1.0, kMaxPktSize));
                const bool flip = rng.bernoulli(0.05 * spec.jitter);
                dir.push_back(flip ? -tpl.dir[static_cast<std::size_t>(t)]
                                   : tpl.dir[static_cast<std::size_t>(t)]);
                iat.push_back(t == 0 ? 0.0
                                     : std::exp(tpl.iat_log_mean +
                                                tpl.iat_log_std * spec.jitter * rng.gaussian()));
            }
            char fid[32];
            std::snprintf(fid, sizeof(fid), "c%02d_f%05d", y, i);
            out.push_back(make_flow(fid, label, size, dir, iat));
        }
    }
    return out;
}

}  // namespace flowaug
