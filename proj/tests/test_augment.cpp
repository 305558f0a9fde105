#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "flowaug/augment.hpp"
#include "test_util.hpp"

using namespace flowaug;
using testutil::fixed_stats;
using testutil::ramp_flow;
using testutil::rows_equal;
using testutil::row_sorted;

// ---- magnitude --------------------------------------------------------------

TEST_CASE("fixed magnitude always returns its alpha") {
    RngStream rng(1);
    Magnitude m{Magnitude::Policy::Fixed, 0.5};
    for (int i = 0; i < 10; ++i) REQUIRE(sample_magnitude(m, rng) == 0.5);
    m.alpha = 1.5;
    REQUIRE_THROWS_AS(sample_magnitude(m, rng), std::invalid_argument);
}

TEST_CASE("uniform magnitude is reproducible and calibrated") {
    Magnitude m{Magnitude::Policy::UniformPerSample, 0.0};
    RngStream a(77), b(77);
    REQUIRE(sample_magnitude(m, a) == sample_magnitude(m, b));

    RngStream rng(5);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double v = sample_magnitude(m, rng);
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        sum += v;
    }
    REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("operators reject magnitudes outside (0,1)") {
    auto x = ramp_flow();
    auto stats = fixed_stats();
    RngStream rng(1);
    REQUIRE_THROWS_AS(gaussian_noise(x, 0.0, stats, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(window_mask(x, 1.0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(translation(x, -0.5, rng), std::invalid_argument);
}

// ---- amplitude family -------------------------------------------------------

TEST_CASE("gaussian_noise: zero sigma is the identity") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 0.0, 0.0);
    for (std::uint64_t s = 0; s < 50; ++s) {
        RngStream rng(s);
        REQUIRE(gaussian_noise(x, 0.5, stats, rng).values == x.values);
    }
}

TEST_CASE("gaussian_noise matches the documented draw trace") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 4.0);
    for (std::uint64_t s = 0; s < 200; ++s) {
        RngStream rng(s), trace(s);
        auto out = gaussian_noise(x, 0.5, stats, rng);
        // trace: one feature pick, then eps_0..eps_19
        const int d = trace.uniform_int(0, 1) == 0 ? kFeatSize : kFeatIat;
        FlowTensor expect = x;
        for (int t = 0; t < kSeqLen; ++t)
            expect.at(d, t) += std::sqrt(0.5) * 4.0 * trace.gaussian();
        REQUIRE(out.values == expect.values);
        REQUIRE(rows_equal(out, x, kFeatDir));
    }
}

TEST_CASE("spike_noise alters at most three positions and never decreases them") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 8.0);
    for (std::uint64_t s = 0; s < 500; ++s) {
        RngStream rng(s);
        auto out = spike_noise(x, 0.7, stats, rng);
        int changed = 0;
        for (int d = 0; d < kFeatures; ++d)
            for (int t = 0; t < kSeqLen; ++t)
                if (out.at(d, t) != x.at(d, t)) {
                    ++changed;
                    REQUIRE(out.at(d, t) >= x.at(d, t));
                }
        REQUIRE(changed <= 3);
        REQUIRE(rows_equal(out, x, kFeatDir));
    }
}

TEST_CASE("spike_noise returns all-zero feature rows unchanged") {
    FlowTensor x = ramp_flow();
    for (int t = 0; t < kSeqLen; ++t) {
        x.at(kFeatSize, t) = 0.0;
        x.at(kFeatIat, t) = 0.0;
    }
    auto stats = fixed_stats();
    RngStream rng(3);
    REQUIRE(spike_noise(x, 0.5, stats, rng).values == x.values);
}

TEST_CASE("spike_noise matches the documented draw trace") {
    auto x = ramp_flow();  // iat row has 19 non-zero entries, size row 20
    auto stats = fixed_stats("x", 4.0);
    for (std::uint64_t s = 0; s < 200; ++s) {
        RngStream rng(s), trace(s);
        auto out = spike_noise(x, 0.5, stats, rng);
        const int d = trace.uniform_int(0, 1) == 0 ? kFeatSize : kFeatIat;
        std::vector<int> nonzero;
        for (int t = 0; t < kSeqLen; ++t)
            if (x.at(d, t) != 0.0) nonzero.push_back(t);
        const int k = static_cast<int>(trace.uniform_int(1, 3));
        std::vector<int> slots = trace.sample_distinct(static_cast<int>(nonzero.size()), k);
        std::vector<int> positions;
        for (int sl : slots) positions.push_back(nonzero[static_cast<std::size_t>(sl)]);
        std::sort(positions.begin(), positions.end());
        FlowTensor expect = x;
        for (int t : positions)
            expect.at(d, t) += std::abs(std::sqrt(0.5) * 4.0 * trace.gaussian());
        REQUIRE(out.values == expect.values);
    }
}

TEST_CASE("gaussian_wrapup keeps zeros and collapses to a pure scale at zero sigma") {
    auto x = ramp_flow("r", "x", 12);  // padded tail stays zero
    auto stats = fixed_stats("x", 0.0, 0.0);
    RngStream rng(9);
    auto out = gaussian_wrapup(x, 0.5, stats, rng);
    for (int t = 12; t < kSeqLen; ++t) REQUIRE(out.at(kFeatSize, t) == 0.0);
    // eps degenerates to exactly 1 + 0.01*alpha
    const double pure = 1.0 + 0.01 * 0.5;
    const bool size_scaled = out.at(kFeatSize, 3) == x.at(kFeatSize, 3) * pure;
    const bool iat_scaled = out.at(kFeatIat, 3) == x.at(kFeatIat, 3) * pure;
    REQUIRE((size_scaled || iat_scaled));
    REQUIRE(rows_equal(out, x, kFeatDir));
}

TEST_CASE("gaussian_wrapup matches the documented draw trace") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 0.25);
    for (std::uint64_t s = 0; s < 200; ++s) {
        RngStream rng(s), trace(s);
        auto out = gaussian_wrapup(x, 0.5, stats, rng);
        const int d = trace.uniform_int(0, 1) == 0 ? kFeatSize : kFeatIat;
        FlowTensor expect = x;
        for (int t = 0; t < kSeqLen; ++t) {
            const double eps = 1.0 + 0.01 * 0.5 + std::sqrt(0.02 * 0.5) * 0.25 * trace.gaussian();
            expect.at(d, t) *= eps;
        }
        REQUIRE(out.values == expect.values);
    }
}

TEST_CASE("sine_wrapup ratio stays within the sine envelope") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 4.0, 2.0);
    const double bound = 0.02 * 0.5 * 2.0;
    for (std::uint64_t s = 0; s < 300; ++s) {
        RngStream rng(s);
        auto out = sine_wrapup(x, 0.5, stats, rng);
        for (int d : {kFeatSize, kFeatIat})
            for (int t = 0; t < kSeqLen; ++t)
                if (x.at(d, t) != 0.0 && out.at(d, t) != x.at(d, t))
                    REQUIRE(std::abs(out.at(d, t) / x.at(d, t) - 1.0) <= bound + 1e-12);
        REQUIRE(rows_equal(out, x, kFeatDir));
    }
}

TEST_CASE("sine_wrapup with zero global std is the identity") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 4.0, 0.0);
    RngStream rng(21);
    REQUIRE(sine_wrapup(x, 0.9, stats, rng).values == x.values);
}

TEST_CASE("sine_wrapup matches the documented theta trace") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 4.0, 2.0);
    for (std::uint64_t s = 0; s < 200; ++s) {
        RngStream rng(s), trace(s);
        auto out = sine_wrapup(x, 0.25, stats, rng);
        const int d = trace.uniform_int(0, 1) == 0 ? kFeatSize : kFeatIat;
        const double theta = trace.uniform(0.0, 2.0 * M_PI);
        FlowTensor expect = x;
        for (int i = 0; i < kSeqLen; ++i) {
            const double eps = 1.0 + 0.02 * 0.25 * 2.0 * std::sin(4.0 * M_PI * i / kSeqLen + theta);
            expect.at(d, i) *= eps;
        }
        REQUIRE(out.values == expect.values);
    }
}

TEST_CASE("constant_wrapup scales only IAT, by one shared draw") {
    auto x = ramp_flow();
    auto stats = fixed_stats("x", 4.0, 1.0, 1e9);  // large q99: no reclip interference
    for (std::uint64_t s = 0; s < 300; ++s) {
        RngStream rng(s);
        auto out = constant_wrapup(x, 0.5, stats, rng);
        REQUIRE(rows_equal(out, x, kFeatSize));
        REQUIRE(rows_equal(out, x, kFeatDir));
        // alpha=0.5, global std 1 -> eps in [1.05, 1.15]
        double eps = 0.0;
        for (int t = 1; t < kSeqLen; ++t) {
            const double ratio = out.at(kFeatIat, t) / x.at(kFeatIat, t);
            if (eps == 0.0) eps = ratio;
            REQUIRE(ratio == Catch::Approx(eps).epsilon(1e-12));
        }
        REQUIRE(eps >= 1.05);
        REQUIRE(eps <= 1.15);
    }
}

// ---- masking family ---------------------------------------------------------

TEST_CASE("bernoulli_mask only zeroes and is calibrated") {
    auto x = ramp_flow();
    x.at(kFeatIat, 0) = 0.0078125;  // no pre-existing zeros
    long masked = 0;
    const int trials = 100000;
    for (int s = 0; s < trials; ++s) {
        RngStream rng(static_cast<std::uint64_t>(s));
        auto out = bernoulli_mask(x, 0.5, rng);
        for (int d = 0; d < kFeatures; ++d)
            for (int t = 0; t < kSeqLen; ++t) {
                if (out.at(d, t) == 0.0) ++masked;
                else if (s < 1000) REQUIRE(out.at(d, t) == x.at(d, t));
            }
    }
    const double fraction = static_cast<double>(masked) / (static_cast<double>(trials) * 60.0);
    REQUIRE(std::abs(fraction - 0.30) < 0.01);  // p = 0.6 * 0.5
}

TEST_CASE("bernoulli_mask zero set only grows") {
    auto x = ramp_flow("r", "x", 10);
    for (std::uint64_t s = 0; s < 200; ++s) {
        RngStream rng(s);
        auto out = bernoulli_mask(x, 0.8, rng);
        for (int d = 0; d < kFeatures; ++d)
            for (int t = 0; t < kSeqLen; ++t)
                if (x.at(d, t) == 0.0) REQUIRE(out.at(d, t) == 0.0);
    }
}

TEST_CASE("bernoulli_mask at vanishing alpha is the identity") {
    auto x = ramp_flow();
    for (std::uint64_t s = 0; s < 100; ++s) {
        RngStream rng(s);
        REQUIRE(bernoulli_mask(x, 1e-9, rng).values == x.values);
    }
}

TEST_CASE("window_mask widths follow the graded cap") {
    auto x = ramp_flow();
    x.at(kFeatIat, 0) = 1.0;
    int max_width = 0;
    bool saw_paper_example = false;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        RngStream rng(s);
        auto out = window_mask(x, 0.5, rng);  // W = round(2.25) = 2
        std::vector<int> zero_cols;
        for (int t = 0; t < kSeqLen; ++t)
            if (out.at(kFeatSize, t) == 0.0) zero_cols.push_back(t);
        // contiguous window, identical across features
        REQUIRE(!zero_cols.empty());
        REQUIRE(zero_cols.back() - zero_cols.front() + 1 == static_cast<int>(zero_cols.size()));
        for (int t : zero_cols) {
            REQUIRE(out.at(kFeatDir, t) == 0.0);
            REQUIRE(out.at(kFeatIat, t) == 0.0);
        }
        max_width = std::max(max_width, static_cast<int>(zero_cols.size()));
        if (zero_cols.size() == 2 && zero_cols.front() == 14) saw_paper_example = true;
    }
    REQUIRE(max_width == 2);
    REQUIRE(saw_paper_example);

    for (std::uint64_t s = 0; s < 200; ++s) {
        RngStream rng(s);
        auto out = window_mask(x, 0.1, rng);  // W = round(1.25) = 1
        int zeros = 0;
        for (int t = 0; t < kSeqLen; ++t)
            if (out.at(kFeatSize, t) == 0.0) ++zeros;
        REQUIRE(zeros == 1);
    }
}

// ---- sequence family --------------------------------------------------------

TEST_CASE("horizontal_flip is an involution that reverses columns") {
    auto x = ramp_flow();
    auto flipped = horizontal_flip(x);
    for (int t = 0; t < kSeqLen; ++t)
        REQUIRE(flipped.at(kFeatSize, t) == x.at(kFeatSize, kSeqLen - 1 - t));
    REQUIRE(horizontal_flip(flipped).values == x.values);
    for (int d = 0; d < kFeatures; ++d)
        REQUIRE(row_sorted(flipped, d) == row_sorted(x, d));
}

TEST_CASE("interpolation leaves constant rows unchanged") {
    FlowTensor x = ramp_flow();
    for (int t = 0; t < kSeqLen; ++t) {
        x.at(kFeatSize, t) = 128.0;
        x.at(kFeatDir, t) = 1.0;
        x.at(kFeatIat, t) = 0.5;
    }
    for (std::uint64_t s = 0; s < 100; ++s) {
        RngStream rng(s);
        REQUIRE(interpolation(x, rng).values == x.values);
    }
}

TEST_CASE("interpolation densifies a linear ramp into the half-step ramp") {
    FlowTensor x = ramp_flow();
    for (int t = 0; t < kSeqLen; ++t) x.at(kFeatSize, t) = 2.0 * t;
    bool found_t0 = false, found_t8 = false;
    for (std::uint64_t s = 0; s < 1000 && !(found_t0 && found_t8); ++s) {
        RngStream probe(s);
        const int t0 = static_cast<int>(probe.uniform_int(0, kSeqLen - 1));
        RngStream rng(s);
        auto out = interpolation(x, rng);
        if (t0 == 0) {
            found_t0 = true;
            for (int t = 0; t < kSeqLen; ++t)
                REQUIRE(out.at(kFeatSize, t) == Catch::Approx(static_cast<double>(t)));
        }
        if (t0 == 8) found_t8 = true;
    }
    REQUIRE(found_t0);
    REQUIRE(found_t8);
}

TEST_CASE("cutmix swaps a shared window and conserves the pair") {
    auto x1 = ramp_flow("f1");
    auto x2 = ramp_flow("f2");
    for (int t = 0; t < kSeqLen; ++t) x2.at(kFeatSize, t) += 400.0;  // distinguishable
    bool saw_identity = false, saw_paper = false;
    for (std::uint64_t s = 0; s < 5000; ++s) {
        RngStream rng(s), probe(s);
        const int w = static_cast<int>(probe.uniform_int(0, kSeqLen - 1));
        const int t0 = static_cast<int>(probe.uniform_int(0, kSeqLen - 1 - w));
        auto [a, b] = cutmix_pair(x1, x2, rng);
        if (w == 0) {
            saw_identity = true;
            REQUIRE(a.values == x1.values);
            REQUIRE(b.values == x2.values);
        }
        if (w == 8 && t0 == 2) saw_paper = true;
        // swapped window, untouched elsewhere, per-column coherence
        for (int t = 0; t < kSeqLen; ++t) {
            const bool inside = t >= t0 && t < t0 + w;
            for (int d = 0; d < kFeatures; ++d) {
                REQUIRE(a.at(d, t) == (inside ? x2.at(d, t) : x1.at(d, t)));
                REQUIRE(b.at(d, t) == (inside ? x1.at(d, t) : x2.at(d, t)));
            }
        }
        REQUIRE(a.label == x1.label);
        REQUIRE(b.label == x2.label);
    }
    REQUIRE(saw_identity);
    REQUIRE(saw_paper);

    RngStream rng(1);
    REQUIRE_THROWS_AS(cutmix_pair(x1, x1, rng), std::invalid_argument);
}

TEST_CASE("packet_loss matches an arrival-time oracle") {
    FlowTensor x = ramp_flow();
    for (int t = 0; t < kSeqLen; ++t) x.at(kFeatIat, t) = t == 0 ? 0.0 : 1.0;  // arrivals 0..19
    for (std::uint64_t s = 0; s < 300; ++s) {
        RngStream rng(s), trace(s);
        auto out = packet_loss(x, 0.5, rng);
        const double delta = trace.uniform(0.0, 19.0);
        const double half = 10.0 * 0.5 + 5.0;
        std::vector<int> survivors;
        for (int t = 0; t < kSeqLen; ++t) {
            const double arrival = t;
            if (arrival < delta - half || arrival > delta + half) survivors.push_back(t);
        }
        if (survivors.empty()) survivors.push_back(0);
        REQUIRE(out.valid_len == static_cast<int>(survivors.size()));
        for (std::size_t k = 0; k < survivors.size(); ++k) {
            REQUIRE(out.at(kFeatSize, static_cast<int>(k)) == x.at(kFeatSize, survivors[k]));
            REQUIRE(out.at(kFeatDir, static_cast<int>(k)) == x.at(kFeatDir, survivors[k]));
            const double expected_iat =
                k == 0 ? 0.0 : static_cast<double>(survivors[k] - survivors[k - 1]);
            REQUIRE(out.at(kFeatIat, static_cast<int>(k)) == Catch::Approx(expected_iat));
        }
        for (int t = out.valid_len; t < kSeqLen; ++t)
            for (int d = 0; d < kFeatures; ++d) REQUIRE(out.at(d, t) == 0.0);
    }
}

TEST_CASE("packet_loss keeps the first packet when the window swallows everything") {
    FlowTensor x = ramp_flow();
    for (int t = 0; t < kSeqLen; ++t) x.at(kFeatIat, t) = t == 0 ? 0.0 : 0.001;
    RngStream rng(3);
    auto out = packet_loss(x, 0.5, rng);
    REQUIRE(out.valid_len == 1);
    REQUIRE(out.at(kFeatSize, 0) == x.at(kFeatSize, 0));
    REQUIRE(out.at(kFeatIat, 0) == 0.0);
}

TEST_CASE("packet_loss away from all arrivals reduces to an IAT recompute") {
    FlowTensor x = ramp_flow("r", "x", 2);
    x.at(kFeatIat, 0) = 0.0;
    x.at(kFeatIat, 1) = 100.0;  // arrivals 0 and 100
    bool found = false;
    for (std::uint64_t s = 0; s < 200 && !found; ++s) {
        RngStream probe(s);
        const double delta = probe.uniform(0.0, 100.0);
        if (delta < 16.0 || delta > 84.0) continue;
        found = true;
        RngStream rng(s);
        auto out = packet_loss(x, 0.5, rng);
        REQUIRE(out.valid_len == 2);
        REQUIRE(out.values == x.values);
    }
    REQUIRE(found);
}

TEST_CASE("packet_loss below two packets is the identity") {
    auto x = ramp_flow("r", "x", 1);
    RngStream rng(5);
    REQUIRE(packet_loss(x, 0.5, rng).values == x.values);
}

TEST_CASE("translation matches the shift oracle and duplicates on right shifts") {
    auto x = ramp_flow();
    bool saw_right_dup = false, saw_fixture = false;
    for (std::uint64_t s = 0; s < 5000; ++s) {
        RngStream rng(s), trace(s);
        auto out = translation(x, 0.5, rng);
        const int n = static_cast<int>(trace.uniform_int(1, 3));  // N = 3 at alpha = 0.5
        const bool right = trace.uniform_int(0, 1) == 1;
        const int t0 = static_cast<int>(trace.uniform_int(0, kSeqLen));
        FlowTensor expect = x;
        for (int d = 0; d < kFeatures && t0 < kSeqLen; ++d) {
            if (right) {
                for (int pos = kSeqLen - 1; pos >= t0 + n; --pos)
                    expect.at(d, pos) = x.at(d, pos - n);
                for (int pos = t0; pos < std::min(t0 + n, kSeqLen); ++pos)
                    expect.at(d, pos) = x.at(d, t0);
            } else {
                for (int pos = t0; pos < kSeqLen; ++pos)
                    expect.at(d, pos) = pos + n < kSeqLen ? x.at(d, pos + n) : 0.0;
            }
        }
        REQUIRE(out.values == expect.values);
        if (right && n == 1 && t0 < kSeqLen - 1) {
            saw_right_dup = true;
            REQUIRE(out.at(kFeatSize, t0) == x.at(kFeatSize, t0));
            REQUIRE(out.at(kFeatSize, t0 + 1) == x.at(kFeatSize, t0));
        }
        if (right && n == 1 && t0 == 0) saw_fixture = true;
    }
    REQUIRE(saw_right_dup);
    REQUIRE(saw_fixture);
}

TEST_CASE("wrap emits exactly T columns and follows its categorical trace") {
    auto x = ramp_flow();
    for (std::uint64_t s = 0; s < 300; ++s) {
        RngStream rng(s), trace(s);
        auto out = wrap(x, 0.6, rng);
        std::vector<std::array<double, 3>> cols;
        for (int t = 0; t < kSeqLen && static_cast<int>(cols.size()) < kSeqLen; ++t) {
            const double u = trace.next_double();
            if (u < 0.3) {  // interpolate
                std::array<double, 3> c{}, avg{};
                for (int d = 0; d < kFeatures; ++d) {
                    c[static_cast<std::size_t>(d)] = x.at(d, t);
                    const double nxt = t + 1 < kSeqLen ? x.at(d, t + 1) : 0.0;
                    avg[static_cast<std::size_t>(d)] = 0.5 * (x.at(d, t) + nxt);
                }
                cols.push_back(c);
                if (static_cast<int>(cols.size()) < kSeqLen) cols.push_back(avg);
            } else if (u < 0.6) {
                // discard
            } else {
                std::array<double, 3> c{};
                for (int d = 0; d < kFeatures; ++d) c[static_cast<std::size_t>(d)] = x.at(d, t);
                cols.push_back(c);
            }
        }
        for (int t = 0; t < kSeqLen; ++t)
            for (int d = 0; d < kFeatures; ++d) {
                const double expect =
                    t < static_cast<int>(cols.size())
                        ? cols[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)]
                        : 0.0;
                REQUIRE(out.at(d, t) == expect);
            }
    }
}

TEST_CASE("wrap at vanishing alpha is the identity") {
    auto x = ramp_flow();
    for (std::uint64_t s = 0; s < 100; ++s) {
        RngStream rng(s);
        REQUIRE(wrap(x, 1e-9, rng).values == x.values);
    }
}

TEST_CASE("permutation preserves column multisets and reaches the reference layout") {
    auto x = ramp_flow();
    for (std::uint64_t s = 0; s < 500; ++s) {
        RngStream rng(s);
        auto out = permutation(x, 0.5, rng);
        for (int d = 0; d < kFeatures; ++d)
            REQUIRE(row_sorted(out, d) == row_sorted(x, d));
    }
    // reference layout: segments [7:13] [0:6] [14:19]
    const int expected[] = {7, 8, 9, 10, 11, 12, 13, 0, 1, 2, 3, 4, 5, 6, 14, 15, 16, 17, 18, 19};
    bool saw_fixture = false;
    for (std::uint64_t s = 0; s < 300000 && !saw_fixture; ++s) {
        RngStream rng(s);
        auto out = permutation(x, 0.5, rng);
        bool match = true;
        for (int t = 0; t < kSeqLen && match; ++t)
            match = out.at(kFeatSize, t) == x.at(kFeatSize, expected[t]);
        saw_fixture = match;
    }
    REQUIRE(saw_fixture);
}

namespace {

// independent list-edit oracle for the four retransmission mimics
FlowTensor tcp_oracle(const FlowTensor& x, double alpha, AugKind kind, RngStream trace) {
    using Col = std::array<double, 3>;
    std::vector<Col> cols;
    for (int t = 0; t < x.valid_len; ++t)
        cols.push_back({x.at(0, t), x.at(1, t), x.at(2, t)});
    std::vector<Col> out;
    const double p = 0.1 * alpha;
    if (kind == AugKind::DupRto) {
        std::size_t c = 0;
        while (c < cols.size()) {
            if (trace.bernoulli(p)) {
                const auto r = static_cast<std::size_t>(trace.uniform_int(1, 3));
                const std::size_t e = std::min(c + r, cols.size());
                for (std::size_t i = c; i < e; ++i) out.push_back(cols[i]);
                for (std::size_t i = c; i < e; ++i) out.push_back(cols[i]);
                c = e;
            } else {
                out.push_back(cols[c++]);
            }
        }
    } else if (kind == AugKind::DupFastRetr) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const bool fire = trace.bernoulli(p);
            out.push_back(cols[c]);
            if (fire) out.push_back(cols[c]);
        }
    } else if (kind == AugKind::PermRto) {
        out = cols;
        std::size_t c = 0;
        while (c < out.size()) {
            if (!trace.bernoulli(p)) {
                ++c;
                continue;
            }
            const auto r = static_cast<std::size_t>(trace.uniform_int(1, 3));
            const auto u = static_cast<std::size_t>(trace.uniform_int(1, 3));
            const std::size_t e = std::min(c + r, out.size());
            std::vector<Col> block(out.begin() + static_cast<std::ptrdiff_t>(c),
                                   out.begin() + static_cast<std::ptrdiff_t>(e));
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(c),
                      out.begin() + static_cast<std::ptrdiff_t>(e));
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(std::min(c + u, out.size())),
                       block.begin(), block.end());
        }
    } else {
        out = cols;
        std::size_t c = 0;
        while (c < out.size()) {
            if (!trace.bernoulli(p)) {
                ++c;
                continue;
            }
            const auto u = static_cast<std::size_t>(trace.uniform_int(1, 3));
            const Col moved = out[c];
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(c));
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(std::min(c + u, out.size())),
                       moved);
        }
    }
    FlowTensor result = x;
    result.values = {};
    const int n = std::min<int>(kSeqLen, static_cast<int>(out.size()));
    for (int t = 0; t < n; ++t)
        for (int d = 0; d < kFeatures; ++d)
            result.at(d, t) = out[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)];
    result.valid_len = std::max(1, n);
    return result;
}

}  // namespace

TEST_CASE("tcp_retrans kinds match the list-edit oracle") {
    auto x = ramp_flow();
    for (AugKind kind :
         {AugKind::DupRto, AugKind::DupFastRetr, AugKind::PermRto, AugKind::PermFastRetr}) {
        for (std::uint64_t s = 0; s < 400; ++s) {
            RngStream rng(s);
            auto out = tcp_retrans(x, 0.9, kind, rng);
            auto expect = tcp_oracle(x, 0.9, kind, RngStream(s));
            REQUIRE(out.values == expect.values);
            REQUIRE(out.valid_len == expect.valid_len);
        }
    }
}

TEST_CASE("tcp_retrans without fires is the identity") {
    auto x = ramp_flow();
    for (AugKind kind :
         {AugKind::DupRto, AugKind::DupFastRetr, AugKind::PermRto, AugKind::PermFastRetr}) {
        for (std::uint64_t s = 0; s < 50; ++s) {
            RngStream rng(s);
            REQUIRE(tcp_retrans(x, 1e-7, kind, rng).values == x.values);
        }
    }
}

TEST_CASE("dup_fastretr duplicates the fired packet in place") {
    auto x = ramp_flow();
    bool found = false;
    for (std::uint64_t s = 0; s < 3000 && !found; ++s) {
        RngStream trace(s);
        int fired_at = -1, fires = 0;
        for (int t = 0; t < x.valid_len; ++t)
            if (trace.bernoulli(0.05)) {
                ++fires;
                if (fired_at < 0) fired_at = t;
            }
        if (fires != 1 || fired_at >= kSeqLen - 1) continue;
        found = true;
        RngStream rng(s);
        auto out = tcp_retrans(x, 0.5, AugKind::DupFastRetr, rng);
        for (int d = 0; d < kFeatures; ++d) {
            REQUIRE(out.at(d, fired_at) == x.at(d, fired_at));
            REQUIRE(out.at(d, fired_at + 1) == x.at(d, fired_at));
        }
    }
    REQUIRE(found);
}

// ---- shared contract ----------------------------------------------------------

TEST_CASE("apply_augmentation reclips into the raw domain") {
    auto x = ramp_flow();
    x.at(kFeatSize, 5) = 1460.0;
    auto stats = fixed_stats("x", 500.0, 500.0, 0.25);
    for (const auto& info : augmentation_catalog()) {
        if (info.kind == AugKind::CutMix) continue;
        for (std::uint64_t s = 0; s < 100; ++s) {
            RngStream rng(s);
            auto out = apply_augmentation(info.kind, x, 0.9, stats, rng);
            for (int t = 0; t < kSeqLen; ++t) {
                REQUIRE(out.at(kFeatSize, t) >= 0.0);
                REQUIRE(out.at(kFeatSize, t) <= kMaxPktSize);
                REQUIRE(out.at(kFeatIat, t) >= 0.0);
                REQUIRE(out.at(kFeatIat, t) <= stats.q_iat_99);
            }
        }
    }
}

TEST_CASE("apply_augmentation is deterministic per stream key") {
    auto x = ramp_flow();
    auto partner = ramp_flow("other");
    auto stats = fixed_stats();
    for (const auto& info : augmentation_catalog()) {
        RngStream a(99), b(99);
        auto o1 = apply_augmentation(info.kind, x, 0.5, stats, a, &partner);
        auto o2 = apply_augmentation(info.kind, x, 0.5, stats, b, &partner);
        REQUIRE(o1.values == o2.values);
        REQUIRE(o1.label == x.label);
    }
}

TEST_CASE("catalog names round-trip") {
    REQUIRE(augmentation_catalog().size() == 18);
    int amplitude = 0, masking = 0, sequence = 0;
    for (const auto& info : augmentation_catalog()) {
        REQUIRE(aug_from_name(info.name) == info.kind);
        REQUIRE(aug_name(info.kind) == std::string(info.name));
        switch (info.family) {
            case AugFamily::Amplitude: ++amplitude; break;
            case AugFamily::Masking: ++masking; break;
            case AugFamily::Sequence: ++sequence; break;
        }
    }
    REQUIRE(amplitude == 5);
    REQUIRE(masking == 2);
    REQUIRE(sequence == 11);
    REQUIRE_THROWS_AS(aug_from_name("no_such_op"), DataError);
}
