#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowaug/flow.hpp"
#include "flowaug/rng.hpp"
#include "flowaug/stats.hpp"

namespace flowaug {

enum class AugKind {
    GaussianNoise,
    SpikeNoise,
    GaussianWrapup,
    SineWrapup,
    ConstantWrapup,
    BernoulliMask,
    WindowMask,
    HorizontalFlip,
    Interpolation,
    CutMix,
    PacketLoss,
    Translation,
    Wrap,
    Permutation,
    DupRto,
    DupFastRetr,
    PermRto,
    PermFastRetr,
};

enum class AugFamily { Amplitude, Masking, Sequence };

struct AugInfo {
    AugKind kind;
    const char* name;
    AugFamily family;
};

inline const std::vector<AugInfo>& augmentation_catalog() {
    static const std::vector<AugInfo> catalog = {
        {AugKind::GaussianNoise, "gaussian_noise", AugFamily::Amplitude},
        {AugKind::SpikeNoise, "spike_noise", AugFamily::Amplitude},
        {AugKind::GaussianWrapup, "gaussian_wrapup", AugFamily::Amplitude},
        {AugKind::SineWrapup, "sine_wrapup", AugFamily::Amplitude},
        {AugKind::ConstantWrapup, "constant_wrapup", AugFamily::Amplitude},
        {AugKind::BernoulliMask, "bernoulli_mask", AugFamily::Masking},
        {AugKind::WindowMask, "window_mask", AugFamily::Masking},
        {AugKind::HorizontalFlip, "horizontal_flip", AugFamily::Sequence},
        {AugKind::Interpolation, "interpolation", AugFamily::Sequence},
        {AugKind::CutMix, "cutmix", AugFamily::Sequence},
        {AugKind::PacketLoss, "packet_loss", AugFamily::Sequence},
        {AugKind::Translation, "translation", AugFamily::Sequence},
        {AugKind::Wrap, "wrap", AugFamily::Sequence},
        {AugKind::Permutation, "permutation", AugFamily::Sequence},
        {AugKind::DupRto, "dup_rto", AugFamily::Sequence},
        {AugKind::DupFastRetr, "dup_fastretr", AugFamily::Sequence},
        {AugKind::PermRto, "perm_rto", AugFamily::Sequence},
        {AugKind::PermFastRetr, "perm_fastretr", AugFamily::Sequence},
    };
    return catalog;
}

inline const char* aug_name(AugKind kind) {
    for (const auto& info : augmentation_catalog())
        if (info.kind == kind) return info.name;
    throw std::invalid_argument("unknown augmentation kind");
}

inline AugFamily aug_family(AugKind kind) {
    for (const auto& info : augmentation_catalog())
        if (info.kind == kind) return info.family;
    throw std::invalid_argument("unknown augmentation kind");
}

inline AugKind aug_from_name(const std::string& name) {
    for (const auto& info : augmentation_catalog())
        if (name == info.name) return info.kind;
    throw DataError("unknown augmentation name: '" + name + "'");
}

// Magnitude policy: a fixed alpha or one fresh U(0,1) draw per augmented
// sample, clamped away from the open-interval endpoints.
struct Magnitude {
    enum class Policy { Fixed, UniformPerSample };
    Policy policy = Policy::UniformPerSample;
    double alpha = 0.5;
};

inline double sample_magnitude(const Magnitude& m, RngStream& rng) {
    constexpr double eps = 1e-6;
    if (m.policy == Magnitude::Policy::Fixed) {
        if (!(m.alpha > 0.0 && m.alpha < 1.0))
            throw std::invalid_argument("fixed magnitude must lie in (0,1)");
        return m.alpha;
    }
    return clip(rng.next_double(), eps, 1.0 - eps);
}

struct AugmentationSpec {
    AugKind kind = AugKind::Translation;
    Magnitude magnitude;
};

namespace detail {

inline void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("augmentation magnitude must lie in (0,1)");
}

// round-half-up
inline int round_hu(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// 0-based arg max over {a_i <= alpha}; `base` when no threshold qualifies
inline int graded_max(double alpha, const std::vector<double>& thresholds, int base) {
    int idx = -1;
    for (int i = 0; i < static_cast<int>(thresholds.size()); ++i)
        if (thresholds[static_cast<std::size_t>(i)] <= alpha) idx = i;
    return idx < 0 ? base : base + idx;
}

// Post-operator clamp back to the raw domain. Direction is never clamped.
inline void reclip(FlowTensor& x, const ClassStats& stats) {
    for (int t = 0; t < kSeqLen; ++t) {
        x.at(kFeatSize, t) = clip(x.at(kFeatSize, t), 0.0, kMaxPktSize);
        x.at(kFeatIat, t) = clip(x.at(kFeatIat, t), 0.0, stats.q_iat_99);
    }
}

// draw: one uniform_int(0,1); 0 -> size, 1 -> iat
inline int pick_noise_feature(RngStream& rng) {
    return rng.uniform_int(0, 1) == 0 ? kFeatSize : kFeatIat;
}

using Column = std::array<double, kFeatures>;

inline std::vector<Column> valid_columns(const FlowTensor& x) {
    std::vector<Column> cols(static_cast<std::size_t>(x.valid_len));
    for (int t = 0; t < x.valid_len; ++t)
        for (int d = 0; d < kFeatures; ++d) cols[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)] = x.at(d, t);
    return cols;
}

inline FlowTensor from_columns(const FlowTensor& src, const std::vector<Column>& cols) {
    FlowTensor out = src;
    out.values = {};
    const int n = std::min<int>(kSeqLen, static_cast<int>(cols.size()));
    for (int t = 0; t < n; ++t)
        for (int d = 0; d < kFeatures; ++d) out.at(d, t) = cols[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)];
    out.valid_len = std::max(1, n);
    return out;
}

}  // namespace detail

// ---- Amplitude family -----------------------------------------------------
// These operate on either Size or IAT (one uniform feature pick), never on
// direction. Per-sample draw order is fixed: the feature pick first, then
// any per-position draws in ascending t.

// x'(d,t) = x(d,t) + eps_t,  eps_t ~ N(0, alpha * coord_std(d,t)^2)
inline FlowTensor gaussian_noise(const FlowTensor& x, double alpha, const ClassStats& stats,
                                 RngStream& rng) {
    detail::require_alpha(alpha);
    const auto& pc = stats.for_label(x.label);
    const int d = detail::pick_noise_feature(rng);
    FlowTensor out = x;
    for (int t = 0; t < kSeqLen; ++t) {
        const double sigma = pc.coord_std[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)];
        out.at(d, t) += std::sqrt(alpha) * sigma * rng.gaussian();
    }
    return out;
}

// Adds |eps| to up to 3 non-zero values of the picked feature.
// Draws: feature pick, k ~ U{1,2,3}, k distinct position picks over the
// non-zero slots, then one gaussian per chosen position (ascending t).
inline FlowTensor spike_noise(const FlowTensor& x, double alpha, const ClassStats& stats,
                              RngStream& rng) {
    detail::require_alpha(alpha);
    const auto& pc = stats.for_label(x.label);
    const int d = detail::pick_noise_feature(rng);
    std::vector<int> nonzero;
    for (int t = 0; t < kSeqLen; ++t)
        if (x.at(d, t) != 0.0) nonzero.push_back(t);
    if (nonzero.empty()) return x;
    const int k = static_cast<int>(rng.uniform_int(1, 3));
    std::vector<int> slots = rng.sample_distinct(static_cast<int>(nonzero.size()), k);
    std::vector<int> positions;
    for (int s : slots) positions.push_back(nonzero[static_cast<std::size_t>(s)]);
    std::sort(positions.begin(), positions.end());
    FlowTensor out = x;
    for (int t : positions) {
        const double sigma = pc.coord_std[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)];
        out.at(d, t) += std::abs(std::sqrt(alpha) * sigma * rng.gaussian());
    }
    return out;
}

// x'(d,t) = x(d,t) * eps_t,  eps_t ~ N(1 + 0.01*alpha, 0.02*alpha*coord_std^2)
inline FlowTensor gaussian_wrapup(const FlowTensor& x, double alpha, const ClassStats& stats,
                                  RngStream& rng) {
    detail::require_alpha(alpha);
    const auto& pc = stats.for_label(x.label);
    const int d = detail::pick_noise_feature(rng);
    FlowTensor out = x;
    for (int t = 0; t < kSeqLen; ++t) {
        const double sigma = pc.coord_std[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)];
        const double eps = 1.0 + 0.01 * alpha + std::sqrt(0.02 * alpha) * sigma * rng.gaussian();
        out.at(d, t) *= eps;
    }
    return out;
}

// eps_i = 1 + 0.02*alpha*global_std(d) * sin(4*pi*i/T + theta), theta ~ U[0,2pi)
inline FlowTensor sine_wrapup(const FlowTensor& x, double alpha, const ClassStats& stats,
                              RngStream& rng) {
    detail::require_alpha(alpha);
    const auto& pc = stats.for_label(x.label);
    const int d = detail::pick_noise_feature(rng);
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    const double amp = 0.02 * alpha * pc.global_std[static_cast<std::size_t>(d)];
    FlowTensor out = x;
    for (int i = 0; i < kSeqLen; ++i)
        out.at(d, i) *= 1.0 + amp * std::sin(4.0 * M_PI * i / kSeqLen + theta);
    return out;
}

// Scales every IAT value by one draw eps ~ U[a, b],
// a = 1 + global_std*(0.06 - 0.02*alpha), b = 1 + global_std*(0.14 + 0.02*alpha).
inline FlowTensor constant_wrapup(const FlowTensor& x, double alpha, const ClassStats& stats,
                                  RngStream& rng) {
    detail::require_alpha(alpha);
    const double sigma = stats.for_label(x.label).global_std[kFeatIat];
    const double a = 1.0 + sigma * (0.06 - 0.02 * alpha);
    const double b = 1.0 + sigma * (0.14 + 0.02 * alpha);
    const double eps = rng.uniform(a, b);
    FlowTensor out = x;
    for (int t = 0; t < kSeqLen; ++t) out.at(kFeatIat, t) *= eps;
    return out;
}

// ---- Masking family ---------------------------------------------------------

// Each coordinate zeroed independently with p = 0.6*alpha.
// Draws: one bernoulli per coordinate, feature-major then ascending t.
inline FlowTensor bernoulli_mask(const FlowTensor& x, double alpha, RngStream& rng) {
    detail::require_alpha(alpha);
    const double p = 0.6 * alpha;
    FlowTensor out = x;
    for (int d = 0; d < kFeatures; ++d)
        for (int t = 0; t < kSeqLen; ++t)
            if (rng.bernoulli(p)) out.at(d, t) = 0.0;
    return out;
}

// Zeroes one shared column window: W = round(1 + 2.5*alpha), w ~ U[1,W],
// t ~ U[0, T-w].
inline FlowTensor window_mask(const FlowTensor& x, double alpha, RngStream& rng) {
    detail::require_alpha(alpha);
    const int W = detail::round_hu(1.0 + 2.5 * alpha);
    const int w = static_cast<int>(rng.uniform_int(1, W));
    const int t0 = static_cast<int>(rng.uniform_int(0, kSeqLen - w));
    FlowTensor out = x;
    for (int d = 0; d < kFeatures; ++d)
        for (int t = t0; t < t0 + w; ++t) out.at(d, t) = 0.0;
    return out;
}

// ---- Sequence family --------------------------------------------------------
// All three features move together; the very same column operation is applied
// to every feature row.

inline FlowTensor horizontal_flip(const FlowTensor& x) {
    FlowTensor out = x;
    for (int d = 0; d < kFeatures; ++d)
        for (int t = 0; t < kSeqLen; ++t) out.at(d, t) = x.at(d, kSeqLen - 1 - t);
    return out;
}

// Densify to 2T-1 columns by inserting pairwise averages, then emit T
// consecutive columns from a shared start t ~ U[0, T-1].
inline FlowTensor interpolation(const FlowTensor& x, RngStream& rng) {
    const int t0 = static_cast<int>(rng.uniform_int(0, kSeqLen - 1));
    FlowTensor out = x;
    for (int d = 0; d < kFeatures; ++d) {
        std::array<double, 2 * kSeqLen - 1> dense{};
        for (int t = 0; t < kSeqLen; ++t) {
            dense[static_cast<std::size_t>(2 * t)] = x.at(d, t);
            if (t + 1 < kSeqLen)
                dense[static_cast<std::size_t>(2 * t + 1)] = 0.5 * (x.at(d, t) + x.at(d, t + 1));
        }
        for (int t = 0; t < kSeqLen; ++t) out.at(d, t) = dense[static_cast<std::size_t>(t0 + t)];
    }
    return out;
}

// Swaps one shared column segment between two distinct samples:
// w ~ U[0, T-1], t ~ U[0, T-1-w]. Labels stay with their own tensor.
inline std::pair<FlowTensor, FlowTensor> cutmix_pair(const FlowTensor& x1, const FlowTensor& x2,
                                                     RngStream& rng) {
    if (x1.flow_id == x2.flow_id)
        throw std::invalid_argument("cutmix requires two distinct samples");
    const int w = static_cast<int>(rng.uniform_int(0, kSeqLen - 1));
    const int t0 = static_cast<int>(rng.uniform_int(0, kSeqLen - 1 - w));
    FlowTensor a = x1, b = x2;
    for (int d = 0; d < kFeatures; ++d)
        for (int t = t0; t < t0 + w; ++t) std::swap(a.at(d, t), b.at(d, t));
    return {a, b};
}

// Drops the packets whose arrival time (cumulative IAT) falls inside
// delta +/- (10*alpha + 5), delta ~ U[0, total duration]; survivors keep
// their spacing except across the gap, which is bridged; IAT is recomputed
// with the first survivor reset to 0.
inline FlowTensor packet_loss(const FlowTensor& x, double alpha, RngStream& rng) {
    detail::require_alpha(alpha);
    if (x.valid_len < 2) return x;
    std::vector<double> arrival(static_cast<std::size_t>(x.valid_len));
    double acc = 0.0;
    for (int t = 0; t < x.valid_len; ++t) {
        acc += x.at(kFeatIat, t);
        arrival[static_cast<std::size_t>(t)] = acc;
    }
    const double delta = rng.uniform(0.0, arrival.back());
    const double half = 10.0 * alpha + 5.0;
    std::vector<int> survivors;
    for (int t = 0; t < x.valid_len; ++t) {
        const double a = arrival[static_cast<std::size_t>(t)];
        if (a < delta - half || a > delta + half) survivors.push_back(t);
    }
    if (survivors.empty()) survivors.push_back(0);

    FlowTensor out = x;
    out.values = {};
    out.valid_len = static_cast<int>(survivors.size());
    for (std::size_t k = 0; k < survivors.size(); ++k) {
        const int src = survivors[k];
        out.at(kFeatSize, static_cast<int>(k)) = x.at(kFeatSize, src);
        out.at(kFeatDir, static_cast<int>(k)) = x.at(kFeatDir, src);
        out.at(kFeatIat, static_cast<int>(k)) =
            k == 0 ? 0.0
                   : arrival[static_cast<std::size_t>(src)] -
                         arrival[static_cast<std::size_t>(survivors[k - 1])];
    }
    return out;
}

// Shifts a suffix segment left (values vacate, zero fill) or right (segment
// start value repeats). N graded by alpha over {0.15, 0.3, 0.5, 0.8};
// draws: n ~ U[1,N], direction, t ~ U[0,T] (t = T is a no-op).
inline FlowTensor translation(const FlowTensor& x, double alpha, RngStream& rng) {
    detail::require_alpha(alpha);
    const int N = detail::graded_max(alpha, {0.15, 0.3, 0.5, 0.8}, 1);
    const int n = static_cast<int>(rng.uniform_int(1, N));
    const bool right = rng.uniform_int(0, 1) == 1;
    const int t0 = static_cast<int>(rng.uniform_int(0, kSeqLen));
    FlowTensor out = x;
    if (t0 >= kSeqLen) return out;
    for (int d = 0; d < kFeatures; ++d) {
        if (right) {
            for (int pos = kSeqLen - 1; pos >= t0 + n; --pos) out.at(d, pos) = x.at(d, pos - n);
            for (int pos = t0; pos < std::min(t0 + n, kSeqLen); ++pos) out.at(d, pos) = x.at(d, t0);
        } else {
            for (int pos = t0; pos < kSeqLen; ++pos)
                out.at(d, pos) = pos + n < kSeqLen ? x.at(d, pos + n) : 0.0;
        }
    }
    return out;
}

// Scans columns emitting per a three-way choice with P(interpolate) =
// P(discard) = 0.5*alpha: keep, keep + append the average with the next
// column (zero partner past the end), or drop. One uniform draw per scanned
// column; output truncated/zero-padded to T.
inline FlowTensor wrap(const FlowTensor& x, double alpha, RngStream& rng) {
    detail::require_alpha(alpha);
    std::vector<detail::Column> cols;
    for (int t = 0; t < kSeqLen && static_cast<int>(cols.size()) < kSeqLen; ++t) {
        const double u = rng.next_double();
        if (u < 0.5 * alpha) {
            detail::Column c{}, avg{};
            for (int d = 0; d < kFeatures; ++d) {
                c[static_cast<std::size_t>(d)] = x.at(d, t);
                const double next = t + 1 < kSeqLen ? x.at(d, t + 1) : 0.0;
                avg[static_cast<std::size_t>(d)] = 0.5 * (x.at(d, t) + next);
            }
            cols.push_back(c);
            if (static_cast<int>(cols.size()) < kSeqLen) cols.push_back(avg);
        } else if (u < alpha) {
            // discard
        } else {
            detail::Column c{};
            for (int d = 0; d < kFeatures; ++d) c[static_cast<std::size_t>(d)] = x.at(d, t);
            cols.push_back(c);
        }
    }
    FlowTensor out = x;
    out.values = {};
    for (int t = 0; t < static_cast<int>(cols.size()); ++t)
        for (int d = 0; d < kFeatures; ++d) out.at(d, t) = cols[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)];
    return out;
}

// Splits [0, T) into n random-length segments and concatenates them in a
// random order, identically across features. N graded by alpha over
// {0.15, 0.45, 0.75, 0.9}; draws: n ~ U[2,N], n-1 distinct cut picks,
// then a Fisher-Yates shuffle of the segment order.
inline FlowTensor permutation(const FlowTensor& x, double alpha, RngStream& rng) {
    detail::require_alpha(alpha);
    const int N = detail::graded_max(alpha, {0.15, 0.45, 0.75, 0.9}, 2);
    const int n = static_cast<int>(rng.uniform_int(2, N));
    std::vector<int> cuts = rng.sample_distinct(kSeqLen - 1, n - 1);
    for (int& c : cuts) ++c;  // cut positions in 1..T-1
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(kSeqLen);
    std::vector<std::pair<int, int>> segments;  // [begin, end)
    int begin = 0;
    for (int cut : cuts) {
        segments.emplace_back(begin, cut);
        begin = cut;
    }
    std::vector<int> order(segments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);

    FlowTensor out = x;
    int pos = 0;
    for (int seg : order) {
        const auto [s, e] = segments[static_cast<std::size_t>(seg)];
        for (int t = s; t < e; ++t, ++pos)
            for (int d = 0; d < kFeatures; ++d) out.at(d, pos) = x.at(d, t);
    }
    return out;
}

// TCP-retransmission mimics. All four scan the valid packet list with one
// Bernoulli(0.1*alpha) draw per visited position; range lengths and delays
// are U[1,3]. Duplication emits inline; permutation edits the working list
// in place and re-scans from the same slot, so a delayed packet may fire
// again. Output truncated to T and zero-padded.
inline FlowTensor tcp_retrans(const FlowTensor& x, double alpha, AugKind kind, RngStream& rng) {
    detail::require_alpha(alpha);
    const double p = 0.1 * alpha;
    std::vector<detail::Column> cols = detail::valid_columns(x);
    std::vector<detail::Column> out;

    switch (kind) {
        case AugKind::DupRto: {
            std::size_t c = 0;
            while (c < cols.size()) {
                if (rng.bernoulli(p)) {
                    const auto r = static_cast<std::size_t>(rng.uniform_int(1, 3));
                    const std::size_t e = std::min(c + r, cols.size());
                    for (std::size_t i = c; i < e; ++i) out.push_back(cols[i]);
                    for (std::size_t i = c; i < e; ++i) out.push_back(cols[i]);
                    c = e;
                } else {
                    out.push_back(cols[c++]);
                }
            }
            break;
        }
        case AugKind::DupFastRetr: {
            for (std::size_t c = 0; c < cols.size(); ++c) {
                const bool fire = rng.bernoulli(p);
                out.push_back(cols[c]);
                if (fire) out.push_back(cols[c]);
            }
            break;
        }
        case AugKind::PermRto: {
            out = cols;
            std::size_t c = 0;
            while (c < out.size()) {
                if (!rng.bernoulli(p)) {
                    ++c;
                    continue;
                }
                const auto r = static_cast<std::size_t>(rng.uniform_int(1, 3));
                const auto u = static_cast<std::size_t>(rng.uniform_int(1, 3));
                const std::size_t e = std::min(c + r, out.size());
                std::vector<detail::Column> block(out.begin() + static_cast<std::ptrdiff_t>(c),
                                                  out.begin() + static_cast<std::ptrdiff_t>(e));
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(c),
                          out.begin() + static_cast<std::ptrdiff_t>(e));
                const std::size_t ins = std::min(c + u, out.size());
                out.insert(out.begin() + static_cast<std::ptrdiff_t>(ins), block.begin(), block.end());
            }
            break;
        }
        case AugKind::PermFastRetr: {
            out = cols;
            std::size_t c = 0;
            while (c < out.size()) {
                if (!rng.bernoulli(p)) {
                    ++c;
                    continue;
                }
                const auto u = static_cast<std::size_t>(rng.uniform_int(1, 3));
                const detail::Column moved = out[c];
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(c));
                const std::size_t ins = std::min(c + u, out.size());
                out.insert(out.begin() + static_cast<std::ptrdiff_t>(ins), moved);
            }
            break;
        }
        default:
            throw std::invalid_argument("tcp_retrans expects one of the four retransmission kinds");
    }
    return detail::from_columns(x, out);
}

// Applies one operator. CutMix needs a distinct partner sample; every other
// operator ignores it. Size and IAT are clamped back to the raw domain
// afterwards, so callers may feed the result straight into normalize().
inline FlowTensor apply_augmentation(AugKind kind, const FlowTensor& x, double alpha,
                                     const ClassStats& stats, RngStream& rng,
                                     const FlowTensor* cutmix_partner = nullptr) {
    FlowTensor out;
    switch (kind) {
        case AugKind::GaussianNoise: out = gaussian_noise(x, alpha, stats, rng); break;
        case AugKind::SpikeNoise: out = spike_noise(x, alpha, stats, rng); break;
        case AugKind::GaussianWrapup: out = gaussian_wrapup(x, alpha, stats, rng); break;
        case AugKind::SineWrapup: out = sine_wrapup(x, alpha, stats, rng); break;
        case AugKind::ConstantWrapup: out = constant_wrapup(x, alpha, stats, rng); break;
        case AugKind::BernoulliMask: out = bernoulli_mask(x, alpha, rng); break;
        case AugKind::WindowMask: out = window_mask(x, alpha, rng); break;
        case AugKind::HorizontalFlip: out = horizontal_flip(x); break;
        case AugKind::Interpolation: out = interpolation(x, rng); break;
        case AugKind::CutMix: {
            if (cutmix_partner == nullptr)
                throw std::invalid_argument("cutmix requires a partner sample");
            out = cutmix_pair(x, *cutmix_partner, rng).first;
            break;
        }
        case AugKind::PacketLoss: out = packet_loss(x, alpha, rng); break;
        case AugKind::Translation: out = translation(x, alpha, rng); break;
        case AugKind::Wrap: out = wrap(x, alpha, rng); break;
        case AugKind::Permutation: out = permutation(x, alpha, rng); break;
        case AugKind::DupRto:
        case AugKind::DupFastRetr:
        case AugKind::PermRto:
        case AugKind::PermFastRetr: out = tcp_retrans(x, alpha, kind, rng); break;
    }
    detail::reclip(out, stats);
    return out;
}

inline FlowTensor apply_augmentation(const AugmentationSpec& spec, const FlowTensor& x,
                                     const ClassStats& stats, RngStream& rng,
                                     const FlowTensor* cutmix_partner = nullptr) {
    const double alpha = sample_magnitude(spec.magnitude, rng);
    return apply_augmentation(spec.kind, x, alpha, stats, rng, cutmix_partner);
}

}  // namespace flowaug
