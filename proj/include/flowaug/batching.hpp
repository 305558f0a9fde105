#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowaug/augment.hpp"
#include "flowaug/flow.hpp"
#include "flowaug/rng.hpp"
#include "flowaug/stats.hpp"

namespace flowaug {

enum class BatchPolicy { NoAug, Replace, Inject, PreAugment };
enum class CombinerType { None, Ensemble, RandomStack, MaskedStack };

struct Combiner {
    CombinerType type = CombinerType::None;
    std::vector<AugmentationSpec> augs;  // the pool A'
    std::vector<int> order;              // MaskedStack order; defaults to 0..n-1
    double p_apply = 0.5;
};

// How original and augmented samples combine into training batches.
// batch_size is the effective per-step size: under Inject it is divided by
// (1 + n_inject) before injection so every step sees the configured count.
struct BatchPlan {
    BatchPolicy policy = BatchPolicy::NoAug;
    double p_replace = 0.5;
    int n_inject = 1;
    int preaugment_factor = 1;
    AugmentationSpec aug;
    Combiner combiner;
    bool class_weighted = false;
    int batch_size = 1024;

    int originals_per_step() const {
        if (policy == BatchPolicy::Inject) return std::max(1, batch_size / (1 + n_inject));
        return batch_size;
    }
};

// ---- Combination policies ---------------------------------------------------
// Policies are agnostic of the operator set: they choose op indices and call
// apply_op(index, x, rng). Draw orders are fixed per policy.

// One uniform index draw, then that operator.
template <typename ApplyFn>
FlowTensor combine_ensemble(const FlowTensor& x, int n_ops, RngStream& rng, ApplyFn&& apply_op) {
    if (n_ops < 1) throw std::invalid_argument("ensemble needs a nonempty augmentation pool");
    const int idx = static_cast<int>(rng.uniform_int(0, n_ops - 1));
    return apply_op(idx, x, rng);
}

// Fisher-Yates shuffle of the op order, then every operator once.
template <typename ApplyFn>
FlowTensor combine_random_stack(const FlowTensor& x, int n_ops, RngStream& rng, ApplyFn&& apply_op) {
    if (n_ops < 1) throw std::invalid_argument("random stack needs a nonempty augmentation pool");
    std::vector<int> order(static_cast<std::size_t>(n_ops));
    for (int i = 0; i < n_ops; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);
    FlowTensor out = x;
    for (int idx : order) out = apply_op(idx, out, rng);
    return out;
}

// Fixed order; one Bernoulli(p_apply) draw immediately before each operator.
template <typename ApplyFn>
FlowTensor combine_masked_stack(const FlowTensor& x, const std::vector<int>& order, int n_ops,
                                double p_apply, RngStream& rng, ApplyFn&& apply_op) {
    if (n_ops < 1) throw std::invalid_argument("masked stack needs a nonempty augmentation pool");
    if (!(p_apply >= 0.0 && p_apply <= 1.0))
        throw std::invalid_argument("p_apply must lie in [0,1]");
    std::vector<int> seen(static_cast<std::size_t>(n_ops), 0);
    if (static_cast<int>(order.size()) != n_ops)
        throw std::invalid_argument("masked stack order must be a permutation of the pool");
    for (int idx : order) {
        if (idx < 0 || idx >= n_ops || seen[static_cast<std::size_t>(idx)]++)
            throw std::invalid_argument("masked stack order must be a permutation of the pool");
    }
    FlowTensor out = x;
    for (int idx : order)
        if (rng.bernoulli(p_apply)) out = apply_op(idx, out, rng);
    return out;
}

// ---- Sample-level augmenter -------------------------------------------------

// Applies the plan's single operator or combiner to one sample. The batch
// serves as the partner pool for cutmix: the partner index is one uniform
// draw over the other samples.
class SampleAugmenter {
public:
    SampleAugmenter(const BatchPlan& plan, const ClassStats& stats)
        : plan_(&plan), stats_(&stats) {}

    FlowTensor operator()(const FlowTensor& x, std::size_t self_index,
                          const std::vector<FlowTensor>& pool, RngStream& rng) const {
        const auto apply_spec = [&](const AugmentationSpec& spec, const FlowTensor& in,
                                    RngStream& r) {
            const FlowTensor* partner = nullptr;
            if (spec.kind == AugKind::CutMix) {
                if (pool.size() < 2)
                    throw std::invalid_argument("cutmix needs a batch of at least 2 samples");
                auto j = static_cast<std::size_t>(
                    r.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 2));
                if (j >= self_index) ++j;
                partner = &pool[j];
            }
            return apply_augmentation(spec, in, *stats_, r, partner);
        };

        const Combiner& comb = plan_->combiner;
        if (comb.type == CombinerType::None) return apply_spec(plan_->aug, x, rng);

        const int n_ops = static_cast<int>(comb.augs.size());
        const auto apply_idx = [&](int idx, const FlowTensor& in, RngStream& r) {
            return apply_spec(comb.augs[static_cast<std::size_t>(idx)], in, r);
        };
        switch (comb.type) {
            case CombinerType::Ensemble: return combine_ensemble(x, n_ops, rng, apply_idx);
            case CombinerType::RandomStack: return combine_random_stack(x, n_ops, rng, apply_idx);
            case CombinerType::MaskedStack: {
                std::vector<int> order = comb.order;
                if (order.empty()) {
                    order.resize(static_cast<std::size_t>(n_ops));
                    for (int i = 0; i < n_ops; ++i) order[static_cast<std::size_t>(i)] = i;
                }
                return combine_masked_stack(x, order, n_ops, comb.p_apply, rng, apply_idx);
            }
            default: return apply_spec(plan_->aug, x, rng);
        }
    }

private:
    const BatchPlan* plan_;
    const ClassStats* stats_;
};

// ---- Batch composition ------------------------------------------------------
// Per-sample streams are forked from the step stream by sample index, so
// composition is reproducible and order-independent across samples.

template <typename Fn>
std::vector<FlowTensor> compose_replace(const std::vector<FlowTensor>& batch, double p_replace,
                                        Fn&& aug_fn, RngStream& rng) {
    if (batch.empty()) throw std::invalid_argument("cannot compose an empty batch");
    if (!(p_replace >= 0.0 && p_replace <= 1.0))
        throw std::invalid_argument("p_replace must lie in [0,1]");
    std::vector<FlowTensor> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        RngStream sample_rng = rng.fork("replace", i);
        if (sample_rng.bernoulli(p_replace))
            out.push_back(aug_fn(batch[i], i, batch, sample_rng));
        else
            out.push_back(batch[i]);
    }
    return out;
}

template <typename Fn>
std::vector<FlowTensor> compose_inject(const std::vector<FlowTensor>& batch, int n_inject,
                                       Fn&& aug_fn, RngStream& rng) {
    if (batch.empty()) throw std::invalid_argument("cannot compose an empty batch");
    if (n_inject < 1) throw std::invalid_argument("n_inject must be at least 1");
    std::vector<FlowTensor> out = batch;
    out.reserve(batch.size() * static_cast<std::size_t>(1 + n_inject));
    for (int round = 1; round <= n_inject; ++round) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            RngStream sample_rng = rng.fork("inject", static_cast<std::uint64_t>(round)).fork(i);
            FlowTensor aug = aug_fn(batch[i], i, batch, sample_rng);
            aug.flow_id += "~a" + std::to_string(round);
            out.push_back(std::move(aug));
        }
    }
    return out;
}

// Materializes `factor` augmented copies of every training sample up front;
// each copy draws its own magnitude.
template <typename Fn>
std::vector<FlowTensor> preaugment_dataset(const std::vector<FlowTensor>& train, int factor,
                                           Fn&& aug_fn, RngStream& rng) {
    if (factor < 1) throw std::invalid_argument("pre-augment factor must be at least 1");
    std::vector<FlowTensor> out = train;
    out.reserve(train.size() * static_cast<std::size_t>(1 + factor));
    for (int round = 1; round <= factor; ++round) {
        for (std::size_t i = 0; i < train.size(); ++i) {
            RngStream sample_rng = rng.fork("preaug", static_cast<std::uint64_t>(round)).fork(i);
            FlowTensor aug = aug_fn(train[i], i, train, sample_rng);
            aug.flow_id += "~p" + std::to_string(round);
            out.push_back(std::move(aug));
        }
    }
    return out;
}

// I.i.d. index draws with P(i) proportional to 1 / count(label_i); one
// epoch of draws yields balanced expected class counts.
inline std::vector<std::size_t> weighted_sampler_indices(const std::vector<std::string>& labels,
                                                         std::size_t n_draws, RngStream& rng) {
    if (labels.empty()) throw std::invalid_argument("weighted sampler needs a nonempty dataset");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    std::vector<double> cum(labels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        total += 1.0 / static_cast<double>(counts[labels[i]]);
        cum[i] = total;
    }
    std::vector<std::size_t> out;
    out.reserve(n_draws);
    for (std::size_t k = 0; k < n_draws; ++k) {
        const double u = rng.next_double() * total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        out.push_back(std::min(labels.size() - 1,
                               static_cast<std::size_t>(std::distance(cum.begin(), it))));
    }
    return out;
}

// One training step's batch under the plan. Replace keeps the size, Inject
// multiplies it by 1 + n_inject, NoAug and PreAugment pass originals through
// (pre-augmentation happens once at dataset level).
inline std::vector<FlowTensor> compose_batch(const std::vector<FlowTensor>& originals,
                                             const BatchPlan& plan, const ClassStats& stats,
                                             RngStream& step_rng) {
    SampleAugmenter fn(plan, stats);
    switch (plan.policy) {
        case BatchPolicy::Replace: return compose_replace(originals, plan.p_replace, fn, step_rng);
        case BatchPolicy::Inject: return compose_inject(originals, plan.n_inject, fn, step_rng);
        case BatchPolicy::NoAug:
        case BatchPolicy::PreAugment: return originals;
    }
    return originals;
}

}  // namespace flowaug
