// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sedkit/core.hpp"

namespace sedkit {

/// Clip-level temporal pooling of one class's frame probabilities.
enum class PoolingKind {
    linear_softmax,  // sum(y_t^2) / sum(y_t)
    mean,
    max,
};

/// Accepts "ls", "linear_softmax", "mean", "max".
std::optional<PoolingKind> pooling_kind_from_string(std::string_view name);
std::string_view to_string(PoolingKind kind);

/// Reduces a non-empty probability sequence to one clip-level probability.
/// An all-zero sequence under linear softmax pools to 0 (the limit of
/// constant sequences p -> 0; the 0/0 case is otherwise undefined).
double pool_clip(std::span<const double> sequence, PoolingKind kind);

/// Analytic gradient d pool / d y_t. For linear softmax:
/// (2 y_t S1 - S2) / S1^2 with S1 = sum(y), S2 = sum(y^2); all-zero input
/// throws ("gradient undefined"). For max, the subgradient assigns 1 to the
/// first maximal frame.
std::vector<double> pool_gradient(std::span<const double> sequence, PoolingKind kind);

/// Pools every class column of a clip independently; result is in class
/// map order.
std::vector<double> pool_columns(const PosteriorClip& clip, PoolingKind kind);

}  // namespace sedkit
