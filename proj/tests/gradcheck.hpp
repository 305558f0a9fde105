#pragma once

#include <cmath>
#include <vector>

#include "flowaug/net.hpp"
#include "flowaug/rng.hpp"

namespace testutil {

// Central finite differences of the full softmax cross-entropy loss against
// the analytic backward pass, on a narrow double-precision net.
// Returns the maximum relative error over n_probes random parameter probes.
inline double gradcheck_max_rel_error(int n_probes, std::uint64_t seed, int width = 8,
                                      int batch = 4, int n_classes = 3) {
    using flowaug::Mat;
    using flowaug::Net;
    using flowaug::RngStream;

    Net<double> net({n_classes, width}, seed);
    RngStream rng(seed ^ 0xabcdef);
    Mat<double> x(flowaug::kFeatures, static_cast<Eigen::Index>(batch) * flowaug::kSeqLen);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.next_double();
    std::vector<int> labels;
    for (int n = 0; n < batch; ++n)
        labels.push_back(static_cast<int>(rng.uniform_int(0, n_classes - 1)));

    auto loss_fn = [&]() {
        Mat<double> logits = net.forward(x, batch, true);
        return flowaug::softmax_xent<double>(logits, labels, nullptr);
    };

    // analytic pass
    {
        Mat<double> logits = net.forward(x, batch, true);
        Mat<double> dlogits;
        flowaug::softmax_xent<double>(logits, labels, &dlogits);
        net.backward(dlogits);
    }
    auto params = net.parameters();
    std::vector<std::vector<double>> analytic;
    for (const auto& p : params)
        analytic.emplace_back(p.grad, p.grad + p.size);

    double max_rel = 0.0;
    for (int probe = 0; probe < n_probes; ++probe) {
        const auto pi = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(params.size()) - 1));
        const auto j = static_cast<long>(rng.uniform_int(0, params[pi].size - 1));
        double& theta = params[pi].value[j];
        const double saved = theta;
        const double h = 1e-5 * std::max(1.0, std::abs(saved));
        theta = saved + h;
        const double lp = loss_fn();
        theta = saved - h;
        const double lm = loss_fn();
        theta = saved;
        const double fd = (lp - lm) / (2.0 * h);
        const double g = analytic[pi][static_cast<std::size_t>(j)];
        const double rel = std::abs(fd - g) / std::max({std::abs(fd), std::abs(g), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace testutil
