#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowaug {

// Per-run ranks (1 = best = highest score, ties share the average rank),
// averaged over runs. scores[run][method].
inline std::vector<double> mean_ranks(const std::vector<std::vector<double>>& scores) {
    if (scores.empty()) throw std::invalid_argument("mean_ranks needs at least one run");
    const std::size_t k = scores.front().size();
    if (k < 2) throw std::invalid_argument("mean_ranks needs at least two methods");
    std::vector<double> mean(k, 0.0);
    for (const auto& run : scores) {
        if (run.size() != k) throw std::invalid_argument("ragged score matrix");
        for (double s : run)
            if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return run[a] > run[b];
        });
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && run[idx[j + 1]] == run[idx[i]]) ++j;
            const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t t = i; t <= j; ++t) mean[idx[t]] += avg_rank;
            i = j + 1;
        }
    }
    for (double& m : mean) m /= static_cast<double>(scores.size());
    return mean;
}

// Two-tailed Studentized range quantiles divided by sqrt(2), alpha = 0.05,
// k = 2..20 methods.
inline double nemenyi_q05(int k) {
    static const double table[] = {
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878,
        3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
        3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
    };
    if (k < 2 || k > 20)
        throw std::invalid_argument("Nemenyi q table covers 2..20 methods");
    return table[k - 2];
}

// CD = q_alpha * sqrt(k*(k+1) / (6*N)); mean-rank gaps below it are
// statistically indistinguishable.
inline double nemenyi_cd(int k, int n_runs, double alpha = 0.05) {
    if (n_runs < 1) throw std::invalid_argument("Nemenyi CD needs at least one run");
    if (alpha != 0.05) throw std::invalid_argument("only the alpha=0.05 table is embedded");
    return nemenyi_q05(k) * std::sqrt(static_cast<double>(k) * (k + 1) / (6.0 * n_runs));
}

struct RankingReport {
    std::vector<std::string> methods;
    std::vector<double> mean_rank;
    double cd = 0.0;
    int n_runs = 0;
    std::vector<std::vector<bool>> equivalent;  // |rank_i - rank_j| < CD
};

inline RankingReport make_ranking_report(const std::vector<std::vector<double>>& scores,
                                         std::vector<std::string> methods, double alpha = 0.05) {
    RankingReport report;
    report.methods = std::move(methods);
    report.mean_rank = mean_ranks(scores);
    report.n_runs = static_cast<int>(scores.size());
    report.cd = nemenyi_cd(static_cast<int>(report.mean_rank.size()), report.n_runs, alpha);
    const std::size_t k = report.mean_rank.size();
    report.equivalent.assign(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            report.equivalent[i][j] = std::abs(report.mean_rank[i] - report.mean_rank[j]) < report.cd;
    return report;
}

struct WilcoxonResult {
    double statistic = 0.0;  // min(W+, W-)
    double p_value = 1.0;
    bool reject = false;
    int n = 0;  // pairs after dropping zero differences
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; |differences| are ranked with average ties. Exact null
// distribution (sign enumeration) for n <= 25, normal approximation with
// tie correction above.
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                           const std::vector<double>& b, double alpha = 0.05) {
    if (a.size() != b.size())
        throw std::invalid_argument("wilcoxon needs equal-length paired samples");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw std::invalid_argument("degenerate: all paired differences are zero");
    const int n = static_cast<int>(diffs.size());
    if (n < 5) throw std::invalid_argument("wilcoxon needs at least 5 nonzero differences");

    std::vector<std::size_t> idx(diffs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    std::vector<double> rank(diffs.size(), 0.0);
    std::vector<std::size_t> tie_sizes;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() &&
               std::abs(diffs[idx[j + 1]]) == std::abs(diffs[idx[i]]))
            ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = avg;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }

    double w_plus = 0.0;
    for (std::size_t t = 0; t < diffs.size(); ++t)
        if (diffs[t] > 0.0) w_plus += rank[t];
    const double total = static_cast<double>(n) * (n + 1) / 2.0;
    const double w_minus = total - w_plus;

    WilcoxonResult res;
    res.n = n;
    res.statistic = std::min(w_plus, w_minus);

    if (n <= 25) {
        // Doubled ranks are integral even with ties; count sign assignments
        // reaching each doubled W+ value.
        std::vector<int> r2(diffs.size());
        int max_sum = 0;
        for (std::size_t t = 0; t < diffs.size(); ++t) {
            r2[t] = static_cast<int>(std::lround(2.0 * rank[t]));
            max_sum += r2[t];
        }
        std::vector<double> count(static_cast<std::size_t>(max_sum) + 1, 0.0);
        count[0] = 1.0;
        for (int r : r2)
            for (int s = max_sum; s >= r; --s)
                count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
        const double denom = std::pow(2.0, n);
        const auto w2 = static_cast<int>(std::lround(2.0 * w_plus));
        double p_le = 0.0, p_ge = 0.0;
        for (int s = 0; s <= max_sum; ++s) {
            if (s <= w2) p_le += count[static_cast<std::size_t>(s)];
            if (s >= w2) p_ge += count[static_cast<std::size_t>(s)];
        }
        res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge) / denom);
    } else {
        const double mu = total / 2.0;
        double var = static_cast<double>(n) * (n + 1) * (2 * n + 1) / 24.0;
        for (std::size_t ts : tie_sizes) {
            const double t = static_cast<double>(ts);
            var -= (t * t * t - t) / 48.0;
        }
        const double z = (w_plus - mu) / std::sqrt(var);
        res.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    }
    res.reject = res.p_value < alpha;
    return res;
}

}  // namespace flowaug
