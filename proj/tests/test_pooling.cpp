// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/pooling.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sedkit/rng.hpp"

using namespace sedkit;

namespace {

// Central finite differences of pool_clip itself; independent of the
// analytic gradient path.
std::vector<double> fd_gradient(std::vector<double> seq, PoolingKind kind,
                                double step = 1e-5) {
    std::vector<double> grad(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double saved = seq[i];
        seq[i] = saved + step;
        const double hi = pool_clip(seq, kind);
        seq[i] = saved - step;
        const double lo = pool_clip(seq, kind);
        seq[i] = saved;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) /
                                    std::max({1.0, std::abs(a[i]), std::abs(b[i])}));
    }
    return worst;
}

}  // namespace

TEST_CASE("pool_clip worked values") {
    CHECK(pool_clip(std::vector<double>{0.7, 0.7, 0.7}, PoolingKind::linear_softmax) ==
          doctest::Approx(0.7).epsilon(1e-12));
    CHECK(pool_clip(std::vector<double>{1.0, 0.0, 0.0}, PoolingKind::linear_softmax) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // (0.25 + 1.0) / 1.5
    CHECK(pool_clip(std::vector<double>{0.5, 1.0}, PoolingKind::linear_softmax) ==
          doctest::Approx(1.25 / 1.5).epsilon(1e-12));
    CHECK(pool_clip(std::vector<double>{0.2, 0.8}, PoolingKind::max) == 0.8);
    CHECK(pool_clip(std::vector<double>{0.2, 0.8}, PoolingKind::mean) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pool_clip edge cases") {
    CHECK_THROWS(pool_clip(std::vector<double>{}, PoolingKind::mean));
    CHECK_THROWS(pool_clip(std::vector<double>{1.2}, PoolingKind::mean));
    CHECK_THROWS(pool_clip(std::vector<double>{-0.1}, PoolingKind::max));
    CHECK(pool_clip(std::vector<double>{0.0, 0.0}, PoolingKind::linear_softmax) == 0.0);
}

TEST_CASE("pool_gradient worked values") {
    const auto mean_grad = pool_gradient(std::vector<double>{0.5, 0.5}, PoolingKind::mean);
    CHECK(mean_grad == std::vector<double>{0.5, 0.5});

    // (2 y_t S1 - S2) / S1^2 with S1 = 1.5, S2 = 1.25.
    const auto ls_grad =
        pool_gradient(std::vector<double>{0.5, 1.0}, PoolingKind::linear_softmax);
    CHECK(ls_grad[0] == doctest::Approx(0.25 / 2.25).epsilon(1e-12));
    CHECK(ls_grad[1] == doctest::Approx(1.75 / 2.25).epsilon(1e-12));

    const auto single =
        pool_gradient(std::vector<double>{0.3}, PoolingKind::linear_softmax);
    CHECK(single[0] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_WITH_AS(
        pool_gradient(std::vector<double>{0.0, 0.0}, PoolingKind::linear_softmax),
        doctest::Contains("gradient undefined"), std::invalid_argument);
}

TEST_CASE("pooling gradients match finite differences on random sequences") {
    SplitMix64 rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(16);
        std::vector<double> seq(n);
        bool separated = false;
        while (!separated) {
            for (double& v : seq) {
                v = rng.uniform(0.05, 0.95);
            }
            // Keep the max unique by a margin wider than the probe step so
            // the max subgradient is differentiable where checked.
            separated = true;
            for (std::size_t i = 0; i < n && separated; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (std::abs(seq[i] - seq[j]) < 1e-3) {
                        separated = false;
                        break;
                    }
                }
            }
        }
        for (const PoolingKind kind :
             {PoolingKind::linear_softmax, PoolingKind::mean, PoolingKind::max}) {
            const auto analytic = pool_gradient(seq, kind);
            worst = std::max(worst, max_rel_error(analytic, fd_gradient(seq, kind)));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("linear softmax lies between min and max") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(30);
        std::vector<double> seq(n);
        double lo = 1.0, hi = 0.0;
        for (double& v : seq) {
            v = rng.uniform(0.01, 1.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double pooled = pool_clip(seq, PoolingKind::linear_softmax);
        CHECK(pooled >= lo - 1e-12);
        CHECK(pooled <= hi + 1e-12);
    }
}

TEST_CASE("appending zero frames leaves linear softmax unchanged but shifts the mean") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(12);
        std::vector<double> seq(n);
        for (double& v : seq) {
            v = rng.uniform(0.1, 1.0);
        }
        const double ls_before = pool_clip(seq, PoolingKind::linear_softmax);
        const double mean_before = pool_clip(seq, PoolingKind::mean);
        std::vector<double> padded = seq;
        padded.insert(padded.end(), 5, 0.0);
        CHECK(pool_clip(padded, PoolingKind::linear_softmax) == ls_before);
        CHECK(pool_clip(padded, PoolingKind::mean) < mean_before);
    }
}

TEST_CASE("pool_columns pools each class independently") {
    PosteriorClip clip;
    clip.clip_id = "clip";
    clip.classes = ClassMap({"Dog", "Cat"});
    clip.grid = TimeGrid{0.020, 1};
    clip.probs = Matrix(3, 2);
    for (std::size_t t = 0; t < 3; ++t) {
        clip.probs(t, 0) = 0.7;
        clip.probs(t, 1) = 0.1 * (t + 1);
    }
    const auto pooled = pool_columns(clip, PoolingKind::max);
    CHECK(pooled[0] == 0.7);
    CHECK(pooled[1] == doctest::Approx(0.3));
}
