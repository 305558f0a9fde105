// flowaug: benchmark harness for packet time-series augmentation.
//
// Subcommands: synth, stats, augment, train, bench, rank, latent, report.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 all runs failed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowaug/bench.hpp"
#include "flowaug/config.hpp"
#include "flowaug/stats.hpp"
#include "flowaug/synth.hpp"

namespace fs = std::filesystem;
using namespace flowaug;

namespace {

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("config parse error: " + std::string(e.what()));
    }
    return parse_run_config(j);
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

int cmd_synth(const std::string& out, int classes, const std::string& flows, double jitter,
              std::uint64_t seed) {
    SynthSpec spec;
    spec.n_classes = classes;
    std::vector<int> counts = parse_int_list(flows);
    if (counts.size() == 1) counts.assign(static_cast<std::size_t>(classes), counts.front());
    spec.flows_per_class = counts;
    spec.jitter = jitter;
    spec.seed = seed;
    auto dataset = synth_generate(spec);
    std::ostringstream buffer;
    write_jsonl(buffer, dataset);
    write_atomic(out, buffer.str());
    std::cout << "wrote " << dataset.size() << " flows (" << classes
              << " classes, imbalance ratio " << fmt_double(imbalance_ratio(counts)) << ") to "
              << out << "\n";
    return 0;
}

int cmd_stats(const std::string& data, const std::string& out) {
    auto flows = ingest_jsonl(data);
    auto stats = compute_class_stats(flows);
    write_atomic(out, stats_to_json(stats).dump(2) + "\n");
    std::cout << "stats for " << stats.per_class.size() << " classes, q_iat_99="
              << fmt_double(stats.q_iat_99) << " -> " << out << "\n";
    return 0;
}

int cmd_augment(const std::string& data, const std::string& stats_path, const std::string& aug,
                const std::string& alpha_policy, double alpha, const std::string& out,
                std::uint64_t seed) {
    auto flows = ingest_jsonl(data);
    ClassStats stats;
    if (!stats_path.empty()) {
        std::ifstream in(stats_path);
        if (!in) throw DataError("cannot open stats file: " + stats_path);
        nlohmann::json j;
        in >> j;
        stats = stats_from_json(j);
    } else {
        stats = compute_class_stats(flows);
    }
    BatchPlan plan;
    plan.aug.kind = aug_from_name(aug);
    plan.aug.magnitude.policy = alpha_policy == "fixed" ? Magnitude::Policy::Fixed
                                                        : Magnitude::Policy::UniformPerSample;
    plan.aug.magnitude.alpha = alpha;
    SampleAugmenter fn(plan, stats);
    RngStream root = RngStream(seed).fork("offline_augment");
    std::vector<FlowTensor> augmented;
    augmented.reserve(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        RngStream rng = root.fork(i);
        FlowTensor f = fn(flows[i], i, flows, rng);
        f.flow_id += "~aug";
        augmented.push_back(std::move(f));
    }
    std::ostringstream buffer;
    write_jsonl(buffer, augmented);
    write_atomic(out, buffer.str());
    std::cout << "augmented " << augmented.size() << " flows with " << aug << " -> " << out << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& aug, int fold,
              const std::string& out, std::uint64_t seed) {
    RunConfig cfg = load_config(config_path);
    auto flows = load_dataset(cfg.dataset);
    auto split = make_fold(flows, cfg.fold_seed, static_cast<std::uint64_t>(fold));
    const BatchPlan plan = plan_for_method(cfg, aug);
    const std::uint64_t run_id = stream_tag(aug) + static_cast<std::uint64_t>(fold);
    const RunResult result = fit(split, plan, cfg.train, seed, run_id);
    const std::string hash = config_hash(cfg, seed);
    write_atomic(fs::path(out) / "runs" / run_file_name(aug, fold),
                 run_to_json(aug, fold, plan, result, hash, seed).dump(2) + "\n");
    std::cout << aug << " fold " << fold << ": weighted F1 " << fmt_double(result.weighted_f1)
              << " after " << result.epochs_trained << " epochs\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, int jobs,
              std::uint64_t seed) {
    RunConfig cfg = load_config(config_path);
    const BenchOutcome outcome = run_bench(cfg, out, jobs, seed);
    std::cout << "bench complete: " << (outcome.total - outcome.failed) << "/" << outcome.total
              << " runs succeeded -> " << out << "\n";
    if (outcome.failed == outcome.total) return 3;
    return 0;
}

int cmd_rank(const std::string& scores_path, const std::string& results_dir,
             const std::string& out) {
    if (!results_dir.empty()) {
        auto records = load_run_records(results_dir);
        if (records.empty()) throw DataError("no run results under " + results_dir);
        const BenchRanking ranking = bench_ranking(records);
        if (!ranking.valid) throw DataError("ranking needs at least two augmented methods");
        write_atomic(fs::path(out) / "rank_table.csv", rank_table_csv(ranking, "results ranking"));
        write_atomic(fs::path(out) / "ranking.json", ranking_to_json(ranking).dump(2) + "\n");
        std::cout << "ranked " << ranking.methods.size() << " methods over "
                  << ranking.report.n_runs << " runs, CD=" << fmt_double(ranking.report.cd) << "\n";
        return 0;
    }
    std::ifstream in(scores_path);
    if (!in) throw DataError("cannot open scores file: " + scores_path);
    std::string line;
    std::vector<std::string> methods;
    std::vector<std::vector<double>> scores;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        if (methods.empty()) {
            while (std::getline(ss, cell, ',')) methods.push_back(cell);
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != methods.size())
            throw DataError("scores row length does not match the header");
        scores.push_back(row);
    }
    if (scores.empty()) throw DataError("scores file has no data rows");
    BenchRanking ranking;
    ranking.methods = methods;
    ranking.report = make_ranking_report(scores, methods);
    ranking.valid = true;
    write_atomic(fs::path(out) / "rank_table.csv", rank_table_csv(ranking, "scores ranking"));
    write_atomic(fs::path(out) / "ranking.json", ranking_to_json(ranking).dump(2) + "\n");
    std::cout << "ranked " << methods.size() << " methods over " << scores.size()
              << " runs, CD=" << fmt_double(ranking.report.cd) << "\n";
    return 0;
}

int cmd_latent(const std::string& config_path, const std::string& aug, int fold,
               const std::string& out, std::uint64_t seed) {
    RunConfig cfg = load_config(config_path);
    run_latent(cfg, aug, fold, out, seed);
    std::cout << "latent analyses for " << aug << " fold " << fold << " -> " << out << "\n";
    return 0;
}

int cmd_report(const std::string& results_dir, const std::string& out) {
    emit_report(results_dir, out);
    std::cout << "report bundle -> " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"packet time-series augmentation benchmark"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out = "out";
    int jobs = 1;
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--out", out, "output directory or file")->capture_default_str();
    app.add_option("--jobs", jobs, "parallel runs (bench)")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    int classes = 5;
    std::string flows = "400";
    double jitter = 1.0;
    synth->add_option("--classes", classes, "number of classes")->capture_default_str();
    synth->add_option("--flows", flows, "flows per class (single value or comma list)")
        ->capture_default_str();
    synth->add_option("--jitter", jitter, "per-flow deviation scale")->capture_default_str();

    auto* stats = app.add_subcommand("stats", "compute class statistics from a dataset");
    std::string data;
    stats->add_option("--data", data, "JSON Lines dataset")->required();

    auto* augment = app.add_subcommand("augment", "apply one augmentation to a dataset file");
    std::string stats_path, aug_name_opt = "translation", alpha_policy = "uniform";
    double alpha = 0.5;
    augment->add_option("--data", data, "JSON Lines dataset")->required();
    augment->add_option("--stats", stats_path, "stats JSON (computed from data when omitted)");
    augment->add_option("--aug", aug_name_opt, "augmentation name")->capture_default_str();
    augment->add_option("--alpha-policy", alpha_policy, "fixed | uniform")->capture_default_str();
    augment->add_option("--alpha", alpha, "magnitude for the fixed policy")->capture_default_str();

    auto* train = app.add_subcommand("train", "train a single run");
    std::string config_path;
    int fold = 0;
    train->add_option("--config", config_path, "run config JSON")->required();
    train->add_option("--aug", aug_name_opt, "augmentation name or 'none'")->capture_default_str();
    train->add_option("--fold", fold, "fold index")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "run the full benchmark grid");
    bench->add_option("--config", config_path, "run config JSON")->required();

    auto* rank = app.add_subcommand("rank", "rank methods from results or a scores CSV");
    std::string scores_path, results_dir;
    rank->add_option("--scores", scores_path, "CSV: header of method names, one row per run");
    rank->add_option("--results", results_dir, "results directory from bench");

    auto* latent = app.add_subcommand("latent", "latent-space analyses for one run");
    latent->add_option("--config", config_path, "run config JSON")->required();
    latent->add_option("--aug", aug_name_opt, "augmentation name or 'none'")->capture_default_str();
    latent->add_option("--fold", fold, "fold index")->capture_default_str();

    auto* report = app.add_subcommand("report", "emit the CSV report bundle");
    report->add_option("--results", results_dir, "results directory from bench/latent")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(out, classes, flows, jitter, seed);
        if (stats->parsed()) return cmd_stats(data, out);
        if (augment->parsed())
            return cmd_augment(data, stats_path, aug_name_opt, alpha_policy, alpha, out, seed);
        if (train->parsed()) return cmd_train(config_path, aug_name_opt, fold, out, seed);
        if (bench->parsed()) return cmd_bench(config_path, out, jobs, seed);
        if (rank->parsed()) {
            if (scores_path.empty() && results_dir.empty()) {
                std::cerr << "rank needs --scores or --results\n";
                return 1;
            }
            return cmd_rank(scores_path, results_dir, out);
        }
        if (latent->parsed()) return cmd_latent(config_path, aug_name_opt, fold, out, seed);
        if (report->parsed()) return cmd_report(results_dir, out);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
