#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowaug/flow.hpp"

namespace flowaug {

// Per-class feature statistics over raw clipped values, plus the pooled
// 99th-percentile IAT. Padding columns participate like any other value.
// Standard deviations are population (divide by n): they act as noise
// scales, not estimators.
struct ClassStats {
    struct PerClass {
        std::array<std::array<double, kSeqLen>, kFeatures> coord_mean{};
        std::array<std::array<double, kSeqLen>, kFeatures> coord_std{};
        std::array<double, kFeatures> global_mean{};
        std::array<double, kFeatures> global_std{};
    };
    std::map<std::string, PerClass> per_class;
    double q_iat_99 = 0.0;

    const PerClass& for_label(const std::string& label) const {
        auto it = per_class.find(label);
        if (it == per_class.end()) throw DataError("no statistics for class '" + label + "'");
        return it->second;
    }
};

// Nearest-rank percentile: value at rank ceil(p/100 * n) of the sorted data.
inline double percentile_nearest_rank(std::vector<double> v, double p) {
    if (v.empty()) throw DataError("percentile of empty data");
    std::sort(v.begin(), v.end());
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
    if (rank < 1) rank = 1;
    if (rank > v.size()) rank = v.size();
    return v[rank - 1];
}

inline ClassStats compute_class_stats(const std::vector<FlowTensor>& flows) {
    if (flows.empty()) throw DataError("cannot compute statistics of an empty dataset");
    std::map<std::string, std::vector<const FlowTensor*>> by_class;
    for (const auto& f : flows) by_class[f.label].push_back(&f);

    ClassStats stats;
    std::vector<double> pooled_iat;
    pooled_iat.reserve(flows.size() * kSeqLen);

    for (const auto& [label, members] : by_class) {
        if (members.size() < 2)
            throw DataError("class '" + label + "' has a single flow; std undefined");
        ClassStats::PerClass pc;
        const double n = static_cast<double>(members.size());
        for (int d = 0; d < kFeatures; ++d) {
            double gsum = 0.0;
            for (int t = 0; t < kSeqLen; ++t) {
                double sum = 0.0;
                for (const FlowTensor* f : members) sum += f->at(d, t);
                const double mean = sum / n;
                double sq_dev = 0.0;
                for (const FlowTensor* f : members) {
                    const double dv = f->at(d, t) - mean;
                    sq_dev += dv * dv;
                }
                pc.coord_mean[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)] = mean;
                pc.coord_std[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)] =
                    std::sqrt(sq_dev / n);
                gsum += sum;
            }
            const double gn = n * kSeqLen;
            const double gmean = gsum / gn;
            double gsq_dev = 0.0;
            for (int t = 0; t < kSeqLen; ++t)
                for (const FlowTensor* f : members) {
                    const double dv = f->at(d, t) - gmean;
                    gsq_dev += dv * dv;
                }
            pc.global_mean[static_cast<std::size_t>(d)] = gmean;
            pc.global_std[static_cast<std::size_t>(d)] = std::sqrt(gsq_dev / gn);
        }
        for (const FlowTensor* f : members)
            for (int t = 0; t < kSeqLen; ++t) pooled_iat.push_back(f->at(kFeatIat, t));
        stats.per_class.emplace(label, pc);
    }
    stats.q_iat_99 = percentile_nearest_rank(std::move(pooled_iat), 99.0);
    return stats;
}

inline nlohmann::json stats_to_json(const ClassStats& stats) {
    nlohmann::json j;
    j["q_iat_99"] = stats.q_iat_99;
    auto& classes = j["classes"] = nlohmann::json::object();
    for (const auto& [label, pc] : stats.per_class) {
        nlohmann::json c;
        c["coord_mean"] = pc.coord_mean;
        c["coord_std"] = pc.coord_std;
        c["global_mean"] = pc.global_mean;
        c["global_std"] = pc.global_std;
        classes[label] = std::move(c);
    }
    return j;
}

inline ClassStats stats_from_json(const nlohmann::json& j) {
    ClassStats stats;
    stats.q_iat_99 = j.at("q_iat_99").get<double>();
    for (const auto& [label, c] : j.at("classes").items()) {
        ClassStats::PerClass pc;
        c.at("coord_mean").get_to(pc.coord_mean);
        c.at("coord_std").get_to(pc.coord_std);
        c.at("global_mean").get_to(pc.global_mean);
        c.at("global_std").get_to(pc.global_std);
        stats.per_class.emplace(label, pc);
    }
    return stats;
}

}  // namespace flowaug
