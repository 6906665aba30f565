// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sedkit/core.hpp"

namespace sedkit {

/// The four window-subsampling operators. Each reduces one pooling window
/// (flattened, row-major) to a scalar.
struct MeanMax {};  // mean(x) + max(x)

struct AlphaMeanMax {
    double alpha = 0.5;  // alpha*max(x) + (1-alpha)*mean(x), alpha in [0,1]
};

struct LpPool {
    // p-power mean: (1/|x| * sum(x_i^p))^(1/p). p = 1 is exactly the mean;
    // p -> infinity approaches the max. Default 4.
    double p = 4.0;
};

struct ConvPool {
    std::size_t kernel_size = 2;   // K
    std::vector<double> weights;   // K*K, row-major

    static ConvPool uniform(std::size_t k);
    static ConvPool seeded_random(std::size_t k, std::uint64_t seed);
};

using SubsampleKind = std::variant<MeanMax, AlphaMeanMax, LpPool, ConvPool>;

void validate(const SubsampleKind& kind);
std::string kind_name(const SubsampleKind& kind);

/// Temporal strides of the four subsampling layers; product equals the
/// subsampling factor and strides never increase with depth.
struct SubsampleConfig {
    int factor = 1;
    std::array<int, 4> layers{1, 1, 1, 1};
};

void validate(const SubsampleConfig& config);

/// The inverse factor map: the unique non-increasing sequence over {1,2}
/// whose product is k. Valid k: 1, 2, 4, 8, 16.
std::array<int, 4> factor_to_layers(int k);

/// The forward factor map (product of the strides); validates the sequence.
int layers_to_factor(const std::array<int, 4>& layers);

double subsample_window(std::span<const double> window, const SubsampleKind& kind);

/// Value plus analytic derivatives of subsample_window: with respect to
/// every window element, and with respect to the operator's parameters
/// (alpha for AlphaMeanMax, p for LpPool, the K*K weights for ConvPool;
/// empty for MeanMax).
struct WindowGradient {
    double value = 0.0;
    std::vector<double> d_window;
    std::vector<double> d_params;
};

WindowGradient subsample_window_gradient(std::span<const double> window,
                                         const SubsampleKind& kind);

/// Tiles the feature map into time_stride x feat_stride windows (stride
/// equals window size) and pools each one. Edge windows that fall off the
/// map are pooled over their actual elements; for ConvPool a partial window
/// uses the overlapping top-left sub-kernel.
Matrix subsample_map(const Matrix& feature, std::size_t time_stride,
                     std::size_t feat_stride, const SubsampleKind& kind);

struct GradcheckReport {
    std::string kind;
    int trials = 0;
    std::uint64_t seed = 0;
    double max_relative_error = 0.0;
    double tolerance = 1e-4;
    bool pass = false;
};

/// Compares analytic window gradients (inputs and parameters) with central
/// finite differences, step 1e-5, on seeded random windows. Relative error
/// is |analytic - fd| / max(1, |analytic|, |fd|).
GradcheckReport gradcheck(const SubsampleKind& kind, int trials, std::uint64_t seed);

}  // namespace sedkit
