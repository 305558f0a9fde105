#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowaug/batching.hpp"
#include "flowaug/folds.hpp"
#include "flowaug/metrics.hpp"
#include "flowaug/net.hpp"
#include "flowaug/normalize.hpp"
#include "flowaug/optimizer.hpp"
#include "flowaug/stats.hpp"

namespace flowaug {

struct TrainConfig {
    int max_epochs = 500;
    double lr0 = 1e-3;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double min_delta = 0.02;  // percent validation accuracy
    int patience = 20;
    int width = 64;
};

// Latent vectors collected after training: originals, per-sample augmented
// copies (copy c of sample i sits at i*aug_copies + c), and test samples.
struct LatentDump {
    bool present = false;
    int aug_copies = 0;
    std::vector<std::vector<float>> train, aug, test;
    std::vector<std::string> train_labels, test_labels;
};

struct RunResult {
    std::string augmentation = "none";
    double weighted_f1 = 0.0;  // percent, test split, best-val checkpoint
    MetricsReport test_metrics;
    int epochs_trained = 0;
    int best_epoch = 0;
    std::vector<double> train_loss;
    std::vector<double> val_accuracy;
    std::vector<std::string> classes;
    LatentDump latents;
};

struct FitOptions {
    bool collect_latents = false;
    int latent_aug_copies = 5;
};

namespace detail {

template <typename Scalar>
Mat<Scalar> normalized_matrix(const std::vector<FlowTensor>& flows, std::size_t begin,
                              std::size_t count, const ClassStats& stats) {
    std::vector<NormalizedTensor> norm;
    norm.reserve(count);
    for (std::size_t i = begin; i < begin + count; ++i) norm.push_back(normalize(flows[i], stats));
    return batch_matrix<Scalar>(norm);
}

}  // namespace detail

template <typename Scalar>
MetricsReport evaluate(Net<Scalar>& model, const std::vector<FlowTensor>& flows,
                       const ClassStats& stats, const std::vector<std::string>& classes) {
    std::vector<std::string> y_true, y_pred;
    const std::size_t chunk = 1024;
    for (std::size_t off = 0; off < flows.size(); off += chunk) {
        const std::size_t n = std::min(chunk, flows.size() - off);
        Mat<Scalar> x = detail::normalized_matrix<Scalar>(flows, off, n, stats);
        Mat<Scalar> logits = model.forward(x, static_cast<int>(n), false);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index best;
            logits.col(static_cast<Eigen::Index>(i)).maxCoeff(&best);
            y_true.push_back(flows[off + i].label);
            y_pred.push_back(classes[static_cast<std::size_t>(best)]);
        }
    }
    return classification_metrics(y_true, y_pred);
}

template <typename Scalar>
std::vector<std::vector<float>> embed_all(Net<Scalar>& model, const std::vector<FlowTensor>& flows,
                                          const ClassStats& stats) {
    std::vector<std::vector<float>> out;
    out.reserve(flows.size());
    const std::size_t chunk = 1024;
    for (std::size_t off = 0; off < flows.size(); off += chunk) {
        const std::size_t n = std::min(chunk, flows.size() - off);
        Mat<Scalar> x = detail::normalized_matrix<Scalar>(flows, off, n, stats);
        model.forward(x, static_cast<int>(n), false);
        const Mat<Scalar>& z = model.latent();
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<float> v(static_cast<std::size_t>(z.rows()));
            for (Eigen::Index r = 0; r < z.rows(); ++r)
                v[static_cast<std::size_t>(r)] = static_cast<float>(z(r, static_cast<Eigen::Index>(i)));
            out.push_back(std::move(v));
        }
    }
    return out;
}

inline bool plan_augments(const BatchPlan& plan) { return plan.policy != BatchPolicy::NoAug; }

// Trains the classifier on one fold under a batch plan. Deterministic given
// (master_seed, run_id): model init, shuffles, augmentation draws and the
// class-weighted sampler all derive from that pair. Returns the evaluation
// of the best-validation-accuracy checkpoint on the test split.
inline RunResult fit(const DatasetSplit& split, const BatchPlan& plan, const TrainConfig& cfg,
                     std::uint64_t master_seed, std::uint64_t run_id,
                     const FitOptions& opts = {}) {
    using Scalar = float;
    if (split.train.empty() || split.val.empty() || split.test.empty())
        throw DataError("fit needs nonempty train/val/test splits");

    std::set<std::string> class_set;
    for (const auto* part : {&split.train, &split.val, &split.test})
        for (const auto& f : *part) class_set.insert(f.label);
    const std::vector<std::string> classes(class_set.begin(), class_set.end());
    std::map<std::string, int> class_index;
    for (std::size_t i = 0; i < classes.size(); ++i)
        class_index[classes[i]] = static_cast<int>(i);

    std::vector<FlowTensor> stats_input = split.train;
    stats_input.insert(stats_input.end(), split.val.begin(), split.val.end());
    const ClassStats stats = compute_class_stats(stats_input);

    RngStream root = RngStream(master_seed).fork("run", run_id);

    std::vector<FlowTensor> train_data = split.train;
    if (plan.policy == BatchPolicy::PreAugment) {
        RngStream pre_rng = root.fork("preaugment");
        train_data = preaugment_dataset(train_data, plan.preaugment_factor,
                                        SampleAugmenter(plan, stats), pre_rng);
    }
    std::vector<std::string> train_labels;
    train_labels.reserve(train_data.size());
    for (const auto& f : train_data) train_labels.push_back(f.label);

    Net<Scalar> model({static_cast<int>(classes.size()), cfg.width}, root.fork("init").key());
    AdamW<Scalar> opt(model.parameters(), cfg.weight_decay, cfg.beta1, cfg.beta2, cfg.adam_eps);

    RunResult result;
    result.classes = classes;

    Net<Scalar> best_model = model;
    double best_acc = -1.0;
    double best_significant_acc = -1e18;
    int last_significant_epoch = 0;

    const std::size_t n_train = train_data.size();
    const auto per_step = static_cast<std::size_t>(plan.originals_per_step());

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr = cosine_lr(cfg.lr0, epoch, cfg.max_epochs);
        RngStream epoch_rng = root.fork("epoch", static_cast<std::uint64_t>(epoch));

        std::vector<std::size_t> order(n_train);
        std::iota(order.begin(), order.end(), 0);
        if (plan.class_weighted) {
            RngStream sampler_rng = epoch_rng.fork("sampler");
            order = weighted_sampler_indices(train_labels, n_train, sampler_rng);
        } else {
            RngStream shuffle_rng = epoch_rng.fork("shuffle");
            shuffle_rng.shuffle(order);
        }

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        std::uint64_t step_id = 0;
        for (std::size_t off = 0; off < n_train; off += per_step, ++step_id) {
            const std::size_t count = std::min(per_step, n_train - off);
            std::vector<FlowTensor> originals;
            originals.reserve(count);
            for (std::size_t i = 0; i < count; ++i) originals.push_back(train_data[order[off + i]]);

            RngStream step_rng = epoch_rng.fork("step", step_id);
            const std::vector<FlowTensor> batch = compose_batch(originals, plan, stats, step_rng);

            std::vector<NormalizedTensor> norm;
            std::vector<int> labels;
            norm.reserve(batch.size());
            labels.reserve(batch.size());
            for (const auto& f : batch) {
                norm.push_back(normalize(f, stats));
                labels.push_back(class_index.at(f.label));
            }
            Mat<Scalar> x = batch_matrix<Scalar>(norm);
            Mat<Scalar> logits = model.forward(x, static_cast<int>(batch.size()), true);
            Mat<Scalar> dlogits;
            const double loss = static_cast<double>(softmax_xent(logits, labels, &dlogits));
            if (!std::isfinite(loss))
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch + 1));
            model.backward(dlogits);
            opt.step(lr);
            epoch_loss += loss * static_cast<double>(batch.size());
            seen += batch.size();
        }
        result.train_loss.push_back(epoch_loss / static_cast<double>(seen));

        const double val_acc = evaluate(model, split.val, stats, classes).accuracy;
        result.val_accuracy.push_back(val_acc);
        result.epochs_trained = epoch + 1;

        if (val_acc > best_acc) {
            best_acc = val_acc;
            best_model = model;
            result.best_epoch = epoch + 1;
        }
        if (val_acc >= best_significant_acc + cfg.min_delta) {
            best_significant_acc = val_acc;
            last_significant_epoch = epoch + 1;
        }
        if ((epoch + 1) - last_significant_epoch >= cfg.patience) break;
    }

    result.test_metrics = evaluate(best_model, split.test, stats, classes);
    result.weighted_f1 = result.test_metrics.weighted_f1;

    if (opts.collect_latents) {
        LatentDump& dump = result.latents;
        dump.present = true;
        dump.aug_copies = opts.latent_aug_copies;
        dump.train = embed_all(best_model, split.train, stats);
        dump.test = embed_all(best_model, split.test, stats);
        for (const auto& f : split.train) dump.train_labels.push_back(f.label);
        for (const auto& f : split.test) dump.test_labels.push_back(f.label);

        SampleAugmenter augmenter(plan, stats);
        std::vector<FlowTensor> aug_flows;
        aug_flows.reserve(split.train.size() * static_cast<std::size_t>(opts.latent_aug_copies));
        for (std::size_t i = 0; i < split.train.size(); ++i) {
            for (int c = 0; c < opts.latent_aug_copies; ++c) {
                RngStream aug_rng = root.fork("latent_aug", static_cast<std::uint64_t>(c)).fork(i);
                aug_flows.push_back(plan_augments(plan)
                                        ? augmenter(split.train[i], i, split.train, aug_rng)
                                        : split.train[i]);
            }
        }
        dump.aug = embed_all(best_model, aug_flows, stats);
    }
    return result;
}

}  // namespace flowaug
