#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowaug {

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;  // percent
    std::size_t support = 0;
};

struct MetricsReport {
    double weighted_f1 = 0.0;  // percent
    double accuracy = 0.0;     // percent
    std::vector<ClassMetrics> per_class;
};

// Precision/recall/F1 per class (percent) plus support-weighted F1 and
// accuracy. Classes are every label seen in y_true or y_pred, sorted.
inline MetricsReport classification_metrics(const std::vector<std::string>& y_true,
                                            const std::vector<std::string>& y_pred) {
    if (y_true.empty() || y_true.size() != y_pred.size())
        throw std::invalid_argument("metrics need equal-length nonempty label sequences");
    std::set<std::string> classes(y_true.begin(), y_true.end());
    classes.insert(y_pred.begin(), y_pred.end());
    std::map<std::string, std::size_t> tp, fp, fn;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) {
            ++tp[y_true[i]];
            ++correct;
        } else {
            ++fp[y_pred[i]];
            ++fn[y_true[i]];
        }
    }
    MetricsReport report;
    report.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(y_true.size());
    double weighted = 0.0;
    for (const auto& c : classes) {
        ClassMetrics m;
        m.label = c;
        const double tpc = static_cast<double>(tp[c]);
        const double denom_p = tpc + static_cast<double>(fp[c]);
        const double denom_r = tpc + static_cast<double>(fn[c]);
        m.support = tp[c] + fn[c];
        m.precision = denom_p > 0.0 ? 100.0 * tpc / denom_p : 0.0;
        m.recall = denom_r > 0.0 ? 100.0 * tpc / denom_r : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        weighted += m.f1 * static_cast<double>(m.support);
        report.per_class.push_back(m);
    }
    report.weighted_f1 = weighted / static_cast<double>(y_true.size());
    return report;
}

inline double weighted_f1(const std::vector<std::string>& y_true,
                          const std::vector<std::string>& y_pred) {
    return classification_metrics(y_true, y_pred).weighted_f1;
}

struct GroupMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double weighted_f1 = 0.0;
    std::size_t support = 0;
};

// Support-weighted average of per-class metrics within one class group.
inline GroupMetrics group_metrics(const std::vector<ClassMetrics>& per_class,
                                  const std::set<std::string>& group) {
    GroupMetrics g;
    for (const auto& m : per_class) {
        if (!group.count(m.label)) continue;
        const auto w = static_cast<double>(m.support);
        g.precision += w * m.precision;
        g.recall += w * m.recall;
        g.weighted_f1 += w * m.f1;
        g.support += m.support;
    }
    if (g.support == 0) throw std::invalid_argument("empty class group");
    const auto total = static_cast<double>(g.support);
    g.precision /= total;
    g.recall /= total;
    g.weighted_f1 /= total;
    return g;
}

// Majority/minority breakdown: classes in majority_set vs the rest.
inline std::pair<GroupMetrics, GroupMetrics> majority_minority_metrics(
    const std::vector<ClassMetrics>& per_class, const std::set<std::string>& majority_set) {
    std::set<std::string> minority;
    for (const auto& m : per_class)
        if (!majority_set.count(m.label)) minority.insert(m.label);
    return {group_metrics(per_class, majority_set), group_metrics(per_class, minority)};
}

}  // namespace flowaug
