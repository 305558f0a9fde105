#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowaug/augment.hpp"
#include "flowaug/flow.hpp"
#include "flowaug/ranking.hpp"

namespace flowaug {

// write-temp-then-rename so concurrent runs never expose partial files
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Minimal CSV builder; every file starts with a provenance comment line,
// then the header row.
class CsvWriter {
public:
    CsvWriter(std::string provenance, std::vector<std::string> header) {
        buffer_ += "# " + std::move(provenance) + "\n";
        append_row(header);
    }
    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) buffer_ += ',';
            buffer_ += cells[i];
        }
        buffer_ += '\n';
    }
    const std::string& str() const { return buffer_; }

private:
    std::string buffer_;
};

struct MeanCi {
    double mean = 0.0;
    double ci95 = 0.0;
    int n = 0;
};

// normal-approximation 95% interval half-width: 1.96 * stderr
inline MeanCi mean_ci(const std::vector<double>& values) {
    MeanCi out;
    out.n = static_cast<int>(values.size());
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(out.n);
    if (out.n > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - out.mean) * (v - out.mean);
        const double stderr_ = std::sqrt(sq / (out.n - 1.0)) / std::sqrt(static_cast<double>(out.n));
        out.ci95 = 1.96 * stderr_;
    }
    return out;
}

// Per-run record as stored under runs/ in a results directory.
struct RunRecord {
    std::string augmentation;
    int fold = 0;
    bool failed = false;
    std::string error;
    std::string policy;
    double policy_param = 0.0;
    double weighted_f1 = 0.0;
    double accuracy = 0.0;
    int epochs_trained = 0;
    int best_epoch = 0;
};

inline RunRecord run_record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.augmentation = j.at("augmentation").get<std::string>();
    r.fold = j.at("fold").get<int>();
    r.failed = j.value("failed", false);
    r.error = j.value("error", "");
    r.policy = j.value("policy", "noaug");
    r.policy_param = j.value("policy_param", 0.0);
    if (!r.failed) {
        r.weighted_f1 = j.at("weighted_f1").get<double>();
        r.accuracy = j.value("accuracy", 0.0);
        r.epochs_trained = j.value("epochs_trained", 0);
        r.best_epoch = j.value("best_epoch", 0);
    }
    return r;
}

namespace detail {

inline std::vector<std::string> sorted_files(const std::filesystem::path& dir,
                                             const std::string& extension) {
    std::vector<std::string> files;
    if (!std::filesystem::exists(dir)) return files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == extension)
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace detail

inline std::vector<RunRecord> load_run_records(const std::filesystem::path& results_dir) {
    std::vector<RunRecord> records;
    for (const auto& file : detail::sorted_files(results_dir / "runs", ".json")) {
        std::ifstream in(file);
        nlohmann::json j;
        in >> j;
        records.push_back(run_record_from_json(j));
    }
    return records;
}

// method order: baseline first, then catalog order, then anything else
inline std::vector<std::string> method_order(const std::vector<RunRecord>& records) {
    std::set<std::string> seen;
    for (const auto& r : records) seen.insert(r.augmentation);
    std::vector<std::string> out;
    if (seen.count("none")) out.push_back("none");
    for (const auto& info : augmentation_catalog())
        if (seen.count(info.name)) out.push_back(info.name);
    for (const auto& name : seen)
        if (name != "none" && std::find(out.begin(), out.end(), name) == out.end())
            out.push_back(name);
    return out;
}

// Table-shaped summary: mean weighted F1 per method with 95% CIs and the
// per-fold-paired delta against the baseline.
inline std::string benchmark_table_csv(const std::vector<RunRecord>& records,
                                       const std::string& provenance) {
    std::map<std::string, std::map<int, double>> by_method;  // method -> fold -> wf1
    for (const auto& r : records)
        if (!r.failed) by_method[r.augmentation][r.fold] = r.weighted_f1;

    CsvWriter csv(provenance,
                  {"augmentation", "n_runs", "mean_wf1", "ci95", "delta_vs_baseline", "delta_ci95"});
    const auto& baseline = by_method.count("none") ? by_method.at("none")
                                                   : std::map<int, double>{};
    for (const auto& method : method_order(records)) {
        const auto& folds = by_method.at(method);
        std::vector<double> scores, deltas;
        for (const auto& [fold, wf1] : folds) {
            scores.push_back(wf1);
            if (method != "none" && baseline.count(fold)) deltas.push_back(wf1 - baseline.at(fold));
        }
        const MeanCi s = mean_ci(scores);
        std::vector<std::string> row = {method, std::to_string(s.n), fmt_double(s.mean),
                                        fmt_double(s.ci95)};
        if (!deltas.empty()) {
            const MeanCi d = mean_ci(deltas);
            row.push_back(fmt_double(d.mean));
            row.push_back(fmt_double(d.ci95));
        } else {
            row.push_back("");
            row.push_back("");
        }
        csv.append_row(row);
    }
    return csv.str();
}

// Rank table over the augmented methods (baseline excluded), one rank column
// per method from the per-fold weighted F1 matrix. Folds with any missing
// method are dropped.
struct BenchRanking {
    std::vector<std::string> methods;
    RankingReport report;
    bool valid = false;
};

inline BenchRanking bench_ranking(const std::vector<RunRecord>& records) {
    BenchRanking out;
    std::map<std::string, std::map<int, double>> by_method;
    std::set<int> folds;
    for (const auto& r : records) {
        if (r.failed || r.augmentation == "none") continue;
        by_method[r.augmentation][r.fold] = r.weighted_f1;
        folds.insert(r.fold);
    }
    for (const auto& method : method_order(records))
        if (method != "none" && by_method.count(method)) out.methods.push_back(method);
    if (out.methods.size() < 2) return out;

    std::vector<std::vector<double>> scores;
    for (int fold : folds) {
        std::vector<double> row;
        bool complete = true;
        for (const auto& m : out.methods) {
            if (!by_method.at(m).count(fold)) {
                complete = false;
                break;
            }
            row.push_back(by_method.at(m).at(fold));
        }
        if (complete) scores.push_back(row);
    }
    if (scores.empty()) return out;
    out.report = make_ranking_report(scores, out.methods);
    out.valid = true;
    return out;
}

inline std::string rank_table_csv(const BenchRanking& ranking, const std::string& provenance) {
    CsvWriter csv(provenance, {"augmentation", "mean_rank", "cd", "n_runs"});
    std::vector<std::size_t> idx(ranking.methods.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return ranking.report.mean_rank[a] < ranking.report.mean_rank[b] ||
               (ranking.report.mean_rank[a] == ranking.report.mean_rank[b] &&
                ranking.methods[a] < ranking.methods[b]);
    });
    for (std::size_t i : idx)
        csv.append_row({ranking.methods[i], fmt_double(ranking.report.mean_rank[i]),
                        fmt_double(ranking.report.cd), std::to_string(ranking.report.n_runs)});
    return csv.str();
}

inline nlohmann::json ranking_to_json(const BenchRanking& ranking) {
    nlohmann::json j;
    j["methods"] = ranking.methods;
    j["mean_rank"] = ranking.report.mean_rank;
    j["cd"] = ranking.report.cd;
    j["n_runs"] = ranking.report.n_runs;
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t i = 0; i < ranking.methods.size(); ++i)
        for (std::size_t k = i + 1; k < ranking.methods.size(); ++k)
            if (ranking.report.equivalent[i][k])
                pairs.push_back({ranking.methods[i], ranking.methods[k]});
    j["equivalent_pairs"] = pairs;
    return j;
}

}  // namespace flowaug
