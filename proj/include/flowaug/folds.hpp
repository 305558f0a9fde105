#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowaug/flow.hpp"
#include "flowaug/rng.hpp"

namespace flowaug {

// One stratified 70/15/15 split. Immutable after creation; safe to share
// across concurrent training runs.
struct DatasetSplit {
    std::vector<FlowTensor> train;
    std::vector<FlowTensor> val;
    std::vector<FlowTensor> test;
    std::uint64_t seed = 0;  // derivation key of this fold
};

inline DatasetSplit make_fold(const std::vector<FlowTensor>& flows, std::uint64_t seed,
                              std::uint64_t fold_index) {
    std::map<std::string, std::vector<const FlowTensor*>> by_class;
    for (const auto& f : flows) by_class[f.label].push_back(&f);

    DatasetSplit split;
    RngStream fold_rng = RngStream(seed).fork("fold", fold_index);
    split.seed = fold_rng.key();
    for (auto& [label, members] : by_class) {
        const auto n = static_cast<int>(members.size());
        if (n < 3) throw DataError("class '" + label + "' has fewer than 3 flows; cannot stratify");
        std::vector<int> order(members.size());
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        RngStream class_rng = fold_rng.fork(stream_tag(label));
        class_rng.shuffle(order);
        const int n_train = static_cast<int>(std::lround(0.70 * n));
        const int n_val = static_cast<int>(std::lround(0.15 * n));
        for (int i = 0; i < n; ++i) {
            const FlowTensor& f = *members[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            if (i < n_train)
                split.train.push_back(f);
            else if (i < n_train + n_val)
                split.val.push_back(f);
            else
                split.test.push_back(f);
        }
    }
    return split;
}

inline std::vector<DatasetSplit> make_folds(const std::vector<FlowTensor>& flows, int n_folds,
                                            std::uint64_t seed) {
    std::vector<DatasetSplit> folds;
    folds.reserve(static_cast<std::size_t>(n_folds));
    for (int i = 0; i < n_folds; ++i)
        folds.push_back(make_fold(flows, seed, static_cast<std::uint64_t>(i)));
    return folds;
}

}  // namespace flowaug
