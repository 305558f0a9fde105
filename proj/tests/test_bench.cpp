#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "flowaug/bench.hpp"
#include "flowaug/config.hpp"

using namespace flowaug;
namespace fs = std::filesystem;

namespace {

nlohmann::json tiny_config_json() {
    return nlohmann::json{
        {"dataset",
         {{"synth",
           {{"classes", 3}, {"flows_per_class", {24, 24, 24}}, {"jitter", 0.8}, {"seed", 5}}}}},
        {"folds", {{"n", 2}, {"seed", 3}}},
        {"augmentations", {"horizontal_flip", "window_mask"}},
        {"magnitude", {{"policy", "uniform"}}},
        {"plan", {{"policy", "inject"}, {"n_inject", 1}, {"batch_size", 32}}},
        {"train", {{"max_epochs", 3}, {"patience", 3}, {"width", 16}}},
    };
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("flowaug_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("run config parses every section") {
    auto cfg = parse_run_config(tiny_config_json());
    REQUIRE(cfg.dataset.use_synth);
    REQUIRE(cfg.dataset.synth.n_classes == 3);
    REQUIRE(cfg.n_folds == 2);
    REQUIRE(cfg.augmentations.size() == 2);
    REQUIRE(cfg.plan.policy == BatchPolicy::Inject);
    REQUIRE(cfg.plan.batch_size == 32);
    REQUIRE(cfg.train.max_epochs == 3);
    REQUIRE(cfg.train.width == 16);

    REQUIRE(resolve_augmentations({}).size() == 18);
    REQUIRE(resolve_augmentations({"all"}).size() == 18);
    REQUIRE_THROWS_AS(resolve_augmentations({"bogus"}), DataError);
    REQUIRE_THROWS_AS(parse_run_config(nlohmann::json{{"folds", {{"n", 2}}}}), DataError);
}

TEST_CASE("config hash tracks config and seed") {
    auto cfg = parse_run_config(tiny_config_json());
    REQUIRE(config_hash(cfg, 1) == config_hash(cfg, 1));
    REQUIRE(config_hash(cfg, 1) != config_hash(cfg, 2));
    auto other = cfg;
    other.train.max_epochs = 4;
    REQUIRE(config_hash(cfg, 1) != config_hash(other, 1));
}

TEST_CASE("bench grid writes per-run results and aggregates") {
    auto cfg = parse_run_config(tiny_config_json());
    TempDir dir("bench");
    auto outcome = run_bench(cfg, dir.path, 1, 42);
    REQUIRE(outcome.total == 6);  // (baseline + 2 methods) x 2 folds
    REQUIRE(outcome.failed == 0);

    for (const char* name : {"none__fold0.json", "none__fold1.json", "horizontal_flip__fold0.json",
                             "window_mask__fold1.json"})
        REQUIRE(fs::exists(dir.path / "runs" / name));
    REQUIRE(fs::exists(dir.path / "benchmark_table.csv"));
    REQUIRE(fs::exists(dir.path / "rank_table.csv"));
    REQUIRE(fs::exists(dir.path / "ranking.json"));

    // rank sum identity for k = 2
    std::ifstream in(dir.path / "ranking.json");
    nlohmann::json rj;
    in >> rj;
    double sum = 0.0;
    for (const auto& r : rj.at("mean_rank")) sum += r.get<double>();
    REQUIRE(sum == Catch::Approx(3.0));
    REQUIRE(rj.at("n_runs").get<int>() == 2);

    // every run records the config hash and master seed
    std::ifstream rin(dir.path / "runs" / "none__fold0.json");
    nlohmann::json run;
    rin >> run;
    REQUIRE(run.at("config_hash").get<std::string>() == config_hash(cfg, 42));
    REQUIRE(run.at("master_seed").get<std::uint64_t>() == 42);
}

TEST_CASE("bench reruns are byte-identical") {
    auto cfg = parse_run_config(tiny_config_json());
    TempDir a("bench_a"), b("bench_b");
    run_bench(cfg, a.path, 1, 7);
    run_bench(cfg, b.path, 1, 7);
    for (const char* rel : {"benchmark_table.csv", "rank_table.csv", "ranking.json",
                            "runs/none__fold0.json", "runs/horizontal_flip__fold1.json"})
        REQUIRE(slurp(a.path / rel) == slurp(b.path / rel));
}

TEST_CASE("jobs setting does not change results") {
    auto cfg = parse_run_config(tiny_config_json());
    TempDir a("jobs1"), b("jobs2");
    run_bench(cfg, a.path, 1, 9);
    run_bench(cfg, b.path, 2, 9);
    REQUIRE(slurp(a.path / "benchmark_table.csv") == slurp(b.path / "benchmark_table.csv"));
    REQUIRE(slurp(a.path / "runs/window_mask__fold0.json") ==
            slurp(b.path / "runs/window_mask__fold0.json"));
}

TEST_CASE("failed runs are recorded and the grid continues") {
    auto j = tiny_config_json();
    j["dataset"]["synth"]["flows_per_class"] = {10, 10};
    j["dataset"]["synth"]["classes"] = 2;
    j["augmentations"] = {"cutmix"};
    j["plan"]["batch_size"] = 26;  // 14 train flows -> tail step of one sample: no cutmix partner
    j["plan"]["n_inject"] = 1;
    auto cfg = parse_run_config(j);
    TempDir dir("bench_fail");
    auto outcome = run_bench(cfg, dir.path, 1, 1);
    REQUIRE(outcome.total == 4);
    REQUIRE(outcome.failed == 2);  // both cutmix runs die, baseline survives
    std::ifstream in(dir.path / "runs" / "cutmix__fold0.json");
    nlohmann::json run;
    in >> run;
    REQUIRE(run.at("failed").get<bool>());
    REQUIRE_FALSE(run.at("error").get<std::string>().empty());
    REQUIRE(fs::exists(dir.path / "benchmark_table.csv"));
}

TEST_CASE("report bundle renders from a results directory") {
    auto cfg = parse_run_config(tiny_config_json());
    TempDir results("report_src"), report("report_out");
    run_bench(cfg, results.path, 1, 11);
    emit_report(results.path, report.path);
    for (const char* name : {"benchmark_table.csv", "rank_table.csv", "cd_diagram.csv",
                             "ranking.json", "policy_curves.csv", "gain_vs_epochs.csv"})
        REQUIRE(fs::exists(report.path / name));
    REQUIRE_FALSE(fs::exists(report.path / "anchor_scatter.csv"));  // no latents yet

    run_latent(cfg, "window_mask", 0, results.path, 11);
    REQUIRE(fs::exists(results.path / "latents" / "latent_window_mask__fold0.json"));
    REQUIRE(fs::exists(results.path / "latents" / "pca_window_mask__fold0.csv"));
    emit_report(results.path, report.path);
    REQUIRE(fs::exists(report.path / "anchor_scatter.csv"));
    REQUIRE(fs::exists(report.path / "kde_curves.csv"));

    const std::string scatter = slurp(report.path / "anchor_scatter.csv");
    REQUIRE(scatter.find("window_mask") != std::string::npos);
    REQUIRE(scatter.find("aug_only") != std::string::npos);

    TempDir empty("report_empty");
    REQUIRE_THROWS_AS(emit_report(empty.path, report.path), DataError);
}

TEST_CASE("benchmark table carries deltas against the baseline") {
    auto cfg = parse_run_config(tiny_config_json());
    TempDir dir("bench_delta");
    run_bench(cfg, dir.path, 1, 13);
    const std::string table = slurp(dir.path / "benchmark_table.csv");
    std::stringstream ss(table);
    std::string line;
    std::getline(ss, line);  // provenance
    REQUIRE(line.rfind("# config_hash=", 0) == 0);
    std::getline(ss, line);
    REQUIRE(line ==
            "augmentation,n_runs,mean_wf1,ci95,delta_vs_baseline,delta_ci95");
    std::getline(ss, line);
    REQUIRE(line.rfind("none,2,", 0) == 0);
    REQUIRE(line.substr(line.size() - 2) == ",,");  // baseline has no delta columns
}
