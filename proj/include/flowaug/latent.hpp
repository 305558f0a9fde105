#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flowaug {

enum class AnchorMode { All, AugOnly };

// Neighborhood structure of test samples among training anchors (originals
// plus augmented copies). matched_count counts same-label anchors among the
// K nearest by cosine similarity; distance_ratio compares the nearest
// same-label augmented anchor against the nearest same-label original one
// (cosine distance = 1 - similarity).
struct AnchorStats {
    AnchorMode mode = AnchorMode::All;
    int k = 10;
    std::vector<int> matched_count;        // per test sample
    std::vector<double> mean_similarity;   // per test sample
    double avg_matched = 0.0;
    double avg_similarity = 0.0;
    double distance_ratio = 0.0;
};

namespace detail {

inline Eigen::VectorXf to_unit(const std::vector<float>& v) {
    Eigen::Map<const Eigen::VectorXf> m(v.data(), static_cast<Eigen::Index>(v.size()));
    const float norm = m.norm();
    if (!(norm > 0.0f)) throw std::invalid_argument("zero-norm latent vector");
    return m / norm;
}

}  // namespace detail

inline AnchorStats knn_anchor_stats(const std::vector<std::vector<float>>& train_latents,
                                    const std::vector<std::string>& train_labels,
                                    const std::vector<std::vector<float>>& aug_latents,
                                    int aug_copies,
                                    const std::vector<std::vector<float>>& test_latents,
                                    const std::vector<std::string>& test_labels,
                                    AnchorMode mode = AnchorMode::All, int k = 10) {
    if (train_latents.size() != train_labels.size() || test_latents.size() != test_labels.size())
        throw std::invalid_argument("latents/labels size mismatch");
    if (aug_copies > 0 && aug_latents.size() != train_latents.size() * static_cast<std::size_t>(aug_copies))
        throw std::invalid_argument("augmented latents must hold aug_copies per training sample");

    struct Anchor {
        Eigen::VectorXf unit;
        const std::string* label;
        bool is_aug;
    };
    std::vector<Anchor> anchors;
    if (mode == AnchorMode::All)
        for (std::size_t i = 0; i < train_latents.size(); ++i)
            anchors.push_back({detail::to_unit(train_latents[i]), &train_labels[i], false});
    for (std::size_t i = 0; i < aug_latents.size(); ++i)
        anchors.push_back({detail::to_unit(aug_latents[i]),
                           &train_labels[i / static_cast<std::size_t>(std::max(1, aug_copies))],
                           true});
    if (static_cast<int>(anchors.size()) < k)
        throw std::invalid_argument("fewer anchors than requested neighbors");

    // separate pools for the nearest-anchor distance ratio
    std::vector<Anchor> orig_anchors;
    for (std::size_t i = 0; i < train_latents.size(); ++i)
        orig_anchors.push_back({detail::to_unit(train_latents[i]), &train_labels[i], false});

    AnchorStats stats;
    stats.mode = mode;
    stats.k = k;
    double ratio_sum = 0.0;
    std::size_t ratio_count = 0;

    std::vector<std::pair<float, std::size_t>> sims(anchors.size());
    for (std::size_t ti = 0; ti < test_latents.size(); ++ti) {
        const Eigen::VectorXf q = detail::to_unit(test_latents[ti]);
        for (std::size_t ai = 0; ai < anchors.size(); ++ai)
            sims[ai] = {anchors[ai].unit.dot(q), ai};
        std::partial_sort(sims.begin(), sims.begin() + k, sims.end(),
                          [](const auto& a, const auto& b) {
                              return a.first > b.first || (a.first == b.first && a.second < b.second);
                          });
        int matched = 0;
        double sim_sum = 0.0;
        for (int j = 0; j < k; ++j) {
            const Anchor& a = anchors[sims[static_cast<std::size_t>(j)].second];
            sim_sum += static_cast<double>(sims[static_cast<std::size_t>(j)].first);
            if (*a.label == test_labels[ti]) ++matched;
        }
        stats.matched_count.push_back(matched);
        stats.mean_similarity.push_back(sim_sum / k);

        if (aug_copies > 0) {
            double best_aug = -2.0, best_orig = -2.0;
            for (const Anchor& a : anchors)
                if (a.is_aug && *a.label == test_labels[ti])
                    best_aug = std::max(best_aug, static_cast<double>(a.unit.dot(q)));
            for (const Anchor& a : orig_anchors)
                if (*a.label == test_labels[ti])
                    best_orig = std::max(best_orig, static_cast<double>(a.unit.dot(q)));
            if (best_aug > -2.0 && best_orig > -2.0) {
                const double d_aug = 1.0 - best_aug;
                const double d_orig = 1.0 - best_orig;
                ratio_sum += (d_aug + 1e-30) / (d_orig + 1e-30);
                ++ratio_count;
            }
        }
    }
    const auto n_test = static_cast<double>(test_latents.size());
    stats.avg_matched =
        std::accumulate(stats.matched_count.begin(), stats.matched_count.end(), 0.0) / n_test;
    stats.avg_similarity =
        std::accumulate(stats.mean_similarity.begin(), stats.mean_similarity.end(), 0.0) / n_test;
    stats.distance_ratio = ratio_count > 0 ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
    return stats;
}

struct KdeCurve {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    std::vector<double> distances;
};

inline double percentile_linear(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// Gaussian KDE of per-pair Euclidean distances (original vs its own
// augmentation), Silverman bandwidth. A tiny floor keeps the bandwidth
// positive when all distances coincide.
inline KdeCurve distance_kde(const std::vector<std::vector<float>>& orig,
                             const std::vector<std::vector<float>>& aug,
                             const std::vector<double>& grid) {
    if (orig.size() != aug.size())
        throw std::invalid_argument("distance_kde needs paired original/augmented latents");
    if (orig.size() < 2) throw std::invalid_argument("distance_kde needs at least 2 pairs");
    KdeCurve out;
    out.grid = grid;
    out.distances.reserve(orig.size());
    for (std::size_t i = 0; i < orig.size(); ++i) {
        if (orig[i].size() != aug[i].size())
            throw std::invalid_argument("latent dimension mismatch");
        double sq = 0.0;
        for (std::size_t d = 0; d < orig[i].size(); ++d) {
            const double diff = static_cast<double>(orig[i][d]) - static_cast<double>(aug[i][d]);
            sq += diff * diff;
        }
        out.distances.push_back(std::sqrt(sq));
    }
    const auto n = static_cast<double>(out.distances.size());
    const double mean = std::accumulate(out.distances.begin(), out.distances.end(), 0.0) / n;
    double var = 0.0;
    for (double d : out.distances) var += (d - mean) * (d - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    const double iqr =
        percentile_linear(out.distances, 75.0) - percentile_linear(out.distances, 25.0);
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = std::max(sd, 1e-9);
    out.bandwidth = std::max(0.9 * spread * std::pow(n, -0.2), 1e-9);

    out.density.resize(grid.size(), 0.0);
    const double norm = 1.0 / (n * out.bandwidth * std::sqrt(2.0 * M_PI));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double d : out.distances) {
            const double z = (grid[g] - d) / out.bandwidth;
            acc += std::exp(-0.5 * z * z);
        }
        out.density[g] = norm * acc;
    }
    return out;
}

struct Pca2d {
    std::vector<std::array<double, 2>> coords;
    std::array<double, 2> explained_ratio{};
};

// Projection onto the top-2 principal components of the mean-centered
// latents. Component signs are fixed (largest-magnitude loading positive)
// so outputs are reproducible.
inline Pca2d pca_2d(const std::vector<std::vector<float>>& latents) {
    if (latents.size() < 3) throw std::invalid_argument("pca_2d needs at least 3 points");
    const auto dim = static_cast<Eigen::Index>(latents.front().size());
    const auto n = static_cast<Eigen::Index>(latents.size());
    Eigen::MatrixXd x(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(latents[static_cast<std::size_t>(i)].size()) != dim)
            throw std::invalid_argument("latent dimension mismatch");
        for (Eigen::Index d = 0; d < dim; ++d)
            x(i, d) = static_cast<double>(latents[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]);
    }
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    const Eigen::VectorXd evals = solver.eigenvalues();  // ascending
    const double total = evals.array().max(0.0).sum();
    if (!(total > 0.0)) throw std::invalid_argument("pca_2d needs rank >= 1 data");

    Pca2d out;
    Eigen::MatrixXd components(dim, 2);
    for (int c = 0; c < 2; ++c) {
        const Eigen::Index which = dim - 1 - c;
        Eigen::VectorXd v = solver.eigenvectors().col(which);
        Eigen::Index max_idx;
        v.cwiseAbs().maxCoeff(&max_idx);
        if (v(max_idx) < 0.0) v = -v;
        components.col(c) = v;
        out.explained_ratio[static_cast<std::size_t>(c)] =
            std::max(0.0, evals(which)) / total;
    }
    const Eigen::MatrixXd proj = x * components;
    out.coords.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        out.coords[static_cast<std::size_t>(i)] = {proj(i, 0), proj(i, 1)};
    return out;
}

}  // namespace flowaug
