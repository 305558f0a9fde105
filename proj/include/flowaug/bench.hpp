#pragma once

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "flowaug/config.hpp"
#include "flowaug/folds.hpp"
#include "flowaug/latent.hpp"
#include "flowaug/report.hpp"
#include "flowaug/trainer.hpp"

namespace flowaug {

inline std::vector<FlowTensor> load_dataset(const DatasetConfig& cfg) {
    std::vector<FlowTensor> flows =
        cfg.use_synth ? synth_generate(cfg.synth) : ingest_jsonl(cfg.path);
    return curate(flows, cfg.min_pkts);
}

// The method under test for one grid cell: the baseline ("none"), one named
// operator, or the configured combiner.
inline std::string combiner_method_name(const Combiner& c) {
    switch (c.type) {
        case CombinerType::Ensemble: return "ensemble";
        case CombinerType::RandomStack: return "random_stack";
        case CombinerType::MaskedStack: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "masked_stack_p%.2f", c.p_apply);
            return buf;
        }
        default: return "none";
    }
}

inline std::vector<std::string> bench_methods(const RunConfig& cfg) {
    if (cfg.plan.combiner.type != CombinerType::None)
        return {combiner_method_name(cfg.plan.combiner)};
    return resolve_augmentations(cfg.augmentations);
}

inline BatchPlan plan_for_method(const RunConfig& cfg, const std::string& method) {
    BatchPlan plan = cfg.plan;
    if (method == "none") {
        plan.policy = BatchPolicy::NoAug;
        plan.combiner.type = CombinerType::None;
        return plan;
    }
    if (cfg.plan.combiner.type != CombinerType::None) return plan;  // combined method
    plan.aug.kind = aug_from_name(method);
    plan.aug.magnitude = cfg.magnitude;
    return plan;
}

inline double plan_param(const BatchPlan& plan) {
    switch (plan.policy) {
        case BatchPolicy::Replace: return plan.p_replace;
        case BatchPolicy::Inject: return plan.n_inject;
        case BatchPolicy::PreAugment: return plan.preaugment_factor;
        case BatchPolicy::NoAug: return 0.0;
    }
    return 0.0;
}

inline const char* plan_policy_name(const BatchPlan& plan) {
    switch (plan.policy) {
        case BatchPolicy::Replace: return "replace";
        case BatchPolicy::Inject: return "inject";
        case BatchPolicy::PreAugment: return "preaugment";
        case BatchPolicy::NoAug: return "noaug";
    }
    return "noaug";
}

inline nlohmann::json run_to_json(const std::string& method, int fold, const BatchPlan& plan,
                                  const RunResult& result, const std::string& hash,
                                  std::uint64_t master_seed) {
    nlohmann::json j;
    j["augmentation"] = method;
    j["fold"] = fold;
    j["config_hash"] = hash;
    j["master_seed"] = master_seed;
    j["policy"] = plan_policy_name(plan);
    j["policy_param"] = plan_param(plan);
    j["weighted_f1"] = result.weighted_f1;
    j["accuracy"] = result.test_metrics.accuracy;
    j["epochs_trained"] = result.epochs_trained;
    j["best_epoch"] = result.best_epoch;
    j["train_loss"] = result.train_loss;
    j["val_accuracy"] = result.val_accuracy;
    j["classes"] = result.classes;
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& m : result.test_metrics.per_class)
        per_class.push_back({{"label", m.label},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    j["per_class"] = per_class;
    return j;
}

inline std::string run_file_name(const std::string& method, int fold) {
    return method + "__fold" + std::to_string(fold) + ".json";
}

struct BenchOutcome {
    int total = 0;
    int failed = 0;
};

// Executes the (method x fold) grid, baseline included, and writes per-run
// JSON plus the aggregate benchmark/ranking files. Runs are independent:
// each derives its streams from (master_seed, method, fold), so results do
// not depend on --jobs or completion order.
inline BenchOutcome run_bench(const RunConfig& cfg, const std::filesystem::path& out_dir,
                              int jobs, std::uint64_t master_seed) {
    const std::vector<FlowTensor> flows = load_dataset(cfg.dataset);
    std::vector<DatasetSplit> folds;
    for (int i = 0; i < cfg.n_folds; ++i)
        folds.push_back(make_fold(flows, cfg.fold_seed, static_cast<std::uint64_t>(i)));

    std::vector<std::string> methods = {"none"};
    for (const auto& m : bench_methods(cfg)) methods.push_back(m);
    const std::string hash = config_hash(cfg, master_seed);

    struct Cell {
        std::string method;
        int fold;
        RunRecord record;
    };
    std::vector<Cell> cells;
    for (const auto& method : methods)
        for (int fold = 0; fold < cfg.n_folds; ++fold) cells.push_back({method, fold, {}});

    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            Cell& cell = cells[i];
            const BatchPlan plan = plan_for_method(cfg, cell.method);
            RunRecord& rec = cell.record;
            rec.augmentation = cell.method;
            rec.fold = cell.fold;
            rec.policy = plan_policy_name(plan);
            rec.policy_param = plan_param(plan);
            try {
                const std::uint64_t run_id =
                    stream_tag(cell.method) + static_cast<std::uint64_t>(cell.fold);
                const RunResult result = fit(folds[static_cast<std::size_t>(cell.fold)], plan,
                                             cfg.train, master_seed, run_id);
                rec.weighted_f1 = result.weighted_f1;
                rec.accuracy = result.test_metrics.accuracy;
                rec.epochs_trained = result.epochs_trained;
                rec.best_epoch = result.best_epoch;
                write_atomic(out_dir / "runs" / run_file_name(cell.method, cell.fold),
                             run_to_json(cell.method, cell.fold, plan, result, hash, master_seed)
                                     .dump(2) +
                                 "\n");
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
                nlohmann::json j = {{"augmentation", cell.method}, {"fold", cell.fold},
                                    {"config_hash", hash},        {"master_seed", master_seed},
                                    {"failed", true},             {"error", rec.error},
                                    {"policy", rec.policy},       {"policy_param", rec.policy_param}};
                write_atomic(out_dir / "runs" / run_file_name(cell.method, cell.fold),
                             j.dump(2) + "\n");
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "run failed (" << cell.method << ", fold " << cell.fold
                          << "): " << rec.error << "\n";
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<RunRecord> records;
    BenchOutcome outcome;
    for (const auto& cell : cells) {
        records.push_back(cell.record);
        ++outcome.total;
        if (cell.record.failed) ++outcome.failed;
    }
    const std::string provenance = "config_hash=" + hash + " master_seed=" +
                                   std::to_string(master_seed);
    write_atomic(out_dir / "benchmark_table.csv", benchmark_table_csv(records, provenance));
    const BenchRanking ranking = bench_ranking(records);
    if (ranking.valid) {
        write_atomic(out_dir / "rank_table.csv", rank_table_csv(ranking, provenance));
        nlohmann::json rj = ranking_to_json(ranking);
        rj["config_hash"] = hash;
        rj["master_seed"] = master_seed;
        write_atomic(out_dir / "ranking.json", rj.dump(2) + "\n");
    }
    return outcome;
}

// ---- latent analyses ----------------------------------------------------------

// Trains one run with latent collection and writes the anchor, KDE and 2-D
// projection exports for it.
inline void run_latent(const RunConfig& cfg, const std::string& method, int fold,
                       const std::filesystem::path& out_dir, std::uint64_t master_seed) {
    const std::vector<FlowTensor> flows = load_dataset(cfg.dataset);
    const DatasetSplit split = make_fold(flows, cfg.fold_seed, static_cast<std::uint64_t>(fold));
    const BatchPlan plan = plan_for_method(cfg, method);
    const std::string hash = config_hash(cfg, master_seed);

    FitOptions opts;
    opts.collect_latents = true;
    opts.latent_aug_copies = cfg.latent_aug_copies;
    const std::uint64_t run_id = stream_tag(method) + static_cast<std::uint64_t>(fold);
    const RunResult result = fit(split, plan, cfg.train, master_seed, run_id, opts);
    const LatentDump& dump = result.latents;

    const AnchorStats all_mode =
        knn_anchor_stats(dump.train, dump.train_labels, dump.aug, dump.aug_copies, dump.test,
                         dump.test_labels, AnchorMode::All, 10);
    const AnchorStats aug_mode =
        knn_anchor_stats(dump.train, dump.train_labels, dump.aug, dump.aug_copies, dump.test,
                         dump.test_labels, AnchorMode::AugOnly, 10);

    // pair each original with its first augmented copy
    std::vector<std::vector<float>> first_copy;
    for (std::size_t i = 0; i < dump.train.size(); ++i)
        first_copy.push_back(dump.aug[i * static_cast<std::size_t>(dump.aug_copies)]);
    double max_dist = 0.0;
    KdeCurve kde;
    {
        std::vector<double> probe_grid = {0.0};
        KdeCurve probe = distance_kde(dump.train, first_copy, probe_grid);
        for (double d : probe.distances) max_dist = std::max(max_dist, d);
        std::vector<double> grid;
        const double hi = std::max(1e-6, 1.2 * max_dist);
        for (int g = 0; g <= 256; ++g) grid.push_back(hi * g / 256.0);
        kde = distance_kde(dump.train, first_copy, grid);
    }

    std::vector<std::vector<float>> everything = dump.train;
    everything.insert(everything.end(), dump.aug.begin(), dump.aug.end());
    everything.insert(everything.end(), dump.test.begin(), dump.test.end());
    const Pca2d pca = pca_2d(everything);

    nlohmann::json j;
    j["augmentation"] = method;
    j["fold"] = fold;
    j["config_hash"] = hash;
    j["master_seed"] = master_seed;
    j["weighted_f1"] = result.weighted_f1;
    j["aug_copies"] = dump.aug_copies;
    auto anchor_json = [](const AnchorStats& a) {
        return nlohmann::json{{"avg_matched", a.avg_matched},
                              {"avg_similarity", a.avg_similarity},
                              {"distance_ratio", a.distance_ratio},
                              {"k", a.k}};
    };
    j["anchors_all"] = anchor_json(all_mode);
    j["anchors_aug_only"] = anchor_json(aug_mode);
    j["kde"] = {{"bandwidth", kde.bandwidth}, {"grid", kde.grid}, {"density", kde.density}};
    j["pca_explained"] = pca.explained_ratio;
    write_atomic(out_dir / "latents" / ("latent_" + run_file_name(method, fold)), j.dump(2) + "\n");

    const std::string provenance =
        "config_hash=" + hash + " master_seed=" + std::to_string(master_seed);
    CsvWriter scatter(provenance, {"set", "label", "x", "y"});
    std::size_t row = 0;
    auto emit_rows = [&](const char* set, const std::vector<std::string>& labels, std::size_t n,
                         int copies) {
        for (std::size_t i = 0; i < n; ++i, ++row)
            scatter.append_row({set, labels[copies > 0 ? i / static_cast<std::size_t>(copies) : i],
                                fmt_double(pca.coords[row][0]), fmt_double(pca.coords[row][1])});
    };
    emit_rows("train", dump.train_labels, dump.train.size(), 0);
    emit_rows("aug", dump.train_labels, dump.aug.size(), dump.aug_copies);
    emit_rows("test", dump.test_labels, dump.test.size(), 0);
    write_atomic(out_dir / "latents" / ("pca_" + method + "__fold" + std::to_string(fold) + ".csv"),
                 scatter.str());
}

// ---- report bundle --------------------------------------------------------------

// Renders the CSV bundle from a results directory: benchmark table, rank and
// critical-distance data, policy curves, gain-vs-epochs scatter, and (when
// latent exports exist) the anchor scatter and KDE curves.
inline void emit_report(const std::filesystem::path& results_dir,
                        const std::filesystem::path& out_dir) {
    const std::vector<RunRecord> records = load_run_records(results_dir);
    if (records.empty()) throw DataError("no run results under " + results_dir.string());

    std::string provenance = "results_dir=" + results_dir.filename().string();
    {
        std::ifstream in(results_dir / "runs" /
                         run_file_name(records.front().augmentation, records.front().fold));
        nlohmann::json j;
        in >> j;
        provenance = "config_hash=" + j.value("config_hash", std::string("unknown")) +
                     " master_seed=" + std::to_string(j.value("master_seed", std::uint64_t{0}));
    }

    write_atomic(out_dir / "benchmark_table.csv", benchmark_table_csv(records, provenance));

    const BenchRanking ranking = bench_ranking(records);
    if (ranking.valid) {
        write_atomic(out_dir / "rank_table.csv", rank_table_csv(ranking, provenance));
        CsvWriter cd(provenance, {"augmentation", "mean_rank", "cd"});
        for (std::size_t i = 0; i < ranking.methods.size(); ++i)
            cd.append_row({ranking.methods[i], fmt_double(ranking.report.mean_rank[i]),
                           fmt_double(ranking.report.cd)});
        write_atomic(out_dir / "cd_diagram.csv", cd.str());
        write_atomic(out_dir / "ranking.json", ranking_to_json(ranking).dump(2) + "\n");
    } else {
        std::cerr << "warning: fewer than two augmented methods; rank outputs skipped\n";
    }

    // batching-policy curves: mean weighted F1 per (policy, parameter)
    {
        std::map<std::string, std::map<double, std::vector<double>>> groups;
        for (const auto& r : records)
            if (!r.failed) groups[r.policy][r.policy_param].push_back(r.weighted_f1);
        CsvWriter csv(provenance, {"policy", "param", "n_runs", "mean_wf1", "ci95"});
        for (const auto& [policy, by_param] : groups)
            for (const auto& [param, values] : by_param) {
                const MeanCi s = mean_ci(values);
                csv.append_row({policy, fmt_double(param), std::to_string(s.n),
                                fmt_double(s.mean), fmt_double(s.ci95)});
            }
        write_atomic(out_dir / "policy_curves.csv", csv.str());
    }

    // per-run gain vs training length
    {
        std::map<int, double> baseline;
        for (const auto& r : records)
            if (!r.failed && r.augmentation == "none") baseline[r.fold] = r.weighted_f1;
        CsvWriter csv(provenance,
                      {"augmentation", "fold", "weighted_f1", "delta_vs_baseline", "epochs"});
        for (const auto& r : records) {
            if (r.failed || r.augmentation == "none") continue;
            const std::string delta = baseline.count(r.fold)
                                          ? fmt_double(r.weighted_f1 - baseline.at(r.fold))
                                          : std::string("");
            csv.append_row({r.augmentation, std::to_string(r.fold), fmt_double(r.weighted_f1),
                            delta, std::to_string(r.epochs_trained)});
        }
        write_atomic(out_dir / "gain_vs_epochs.csv", csv.str());
    }

    // latent exports, when the latent step has produced them
    const auto latent_files = detail::sorted_files(results_dir / "latents", ".json");
    if (latent_files.empty()) {
        std::cerr << "warning: no latent dumps found; anchor/KDE sections skipped\n";
        return;
    }
    CsvWriter scatter(provenance, {"augmentation", "fold", "mode", "avg_matched",
                                   "avg_cos_similarity", "distance_ratio", "weighted_f1"});
    CsvWriter kde(provenance, {"augmentation", "fold", "distance", "density"});
    for (const auto& file : latent_files) {
        std::ifstream in(file);
        nlohmann::json j;
        in >> j;
        const std::string method = j.at("augmentation").get<std::string>();
        const std::string fold = std::to_string(j.at("fold").get<int>());
        for (const char* mode : {"all", "aug_only"}) {
            const auto& a = j.at(std::string("anchors_") + mode);
            scatter.append_row({method, fold, mode, fmt_double(a.at("avg_matched").get<double>()),
                                fmt_double(a.at("avg_similarity").get<double>()),
                                fmt_double(a.at("distance_ratio").get<double>()),
                                fmt_double(j.at("weighted_f1").get<double>())});
        }
        const auto& grid = j.at("kde").at("grid");
        const auto& density = j.at("kde").at("density");
        for (std::size_t g = 0; g < grid.size(); ++g)
            kde.append_row({method, fold, fmt_double(grid[g].get<double>()),
                            fmt_double(density[g].get<double>())});
    }
    write_atomic(out_dir / "anchor_scatter.csv", scatter.str());
    write_atomic(out_dir / "kde_curves.csv", kde.str());
}

}  // namespace flowaug
