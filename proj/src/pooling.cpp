// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/pooling.hpp"

#include <algorithm>
#include <stdexcept>

namespace sedkit {
namespace {

void check_sequence(std::span<const double> sequence) {
    if (sequence.empty()) {
        throw std::invalid_argument("pooling requires a non-empty sequence");
    }
    for (double v : sequence) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("pooling input probability out of range");
        }
    }
}

}  // namespace

std::optional<PoolingKind> pooling_kind_from_string(std::string_view name) {
    if (name == "ls" || name == "linear_softmax") {
        return PoolingKind::linear_softmax;
    }
    if (name == "mean") {
        return PoolingKind::mean;
    }
    if (name == "max") {
        return PoolingKind::max;
    }
    return std::nullopt;
}

std::string_view to_string(PoolingKind kind) {
    switch (kind) {
        case PoolingKind::linear_softmax: return "linear_softmax";
        case PoolingKind::mean: return "mean";
        case PoolingKind::max: return "max";
    }
    return "?";
}

double pool_clip(std::span<const double> sequence, PoolingKind kind) {
    check_sequence(sequence);
    switch (kind) {
        case PoolingKind::linear_softmax: {
            double sum = 0.0;
            double sum_sq = 0.0;
            for (double v : sequence) {
                sum += v;
                sum_sq += v * v;
            }
            if (sum == 0.0) {
                return 0.0;
            }
            return sum_sq / sum;
        }
        case PoolingKind::mean: {
            double sum = 0.0;
            for (double v : sequence) {
                sum += v;
            }
            return sum / static_cast<double>(sequence.size());
        }
        case PoolingKind::max:
            return *std::max_element(sequence.begin(), sequence.end());
    }
    throw std::logic_error("unreachable pooling kind");
}

std::vector<double> pool_gradient(std::span<const double> sequence, PoolingKind kind) {
    check_sequence(sequence);
    const std::size_t n = sequence.size();
    std::vector<double> grad(n, 0.0);
    switch (kind) {
        case PoolingKind::linear_softmax: {
            double sum = 0.0;
            double sum_sq = 0.0;
            for (double v : sequence) {
                sum += v;
                sum_sq += v * v;
            }
            if (sum == 0.0) {
                throw std::invalid_argument(
                    "gradient undefined: all-zero sequence under linear softmax");
            }
            for (std::size_t t = 0; t < n; ++t) {
                grad[t] = (2.0 * sequence[t] * sum - sum_sq) / (sum * sum);
            }
            return grad;
        }
        case PoolingKind::mean: {
            std::fill(grad.begin(), grad.end(), 1.0 / static_cast<double>(n));
            return grad;
        }
        case PoolingKind::max: {
            const auto it = std::max_element(sequence.begin(), sequence.end());
            grad[static_cast<std::size_t>(it - sequence.begin())] = 1.0;
            return grad;
        }
    }
    throw std::logic_error("unreachable pooling kind");
}

std::vector<double> pool_columns(const PosteriorClip& clip, PoolingKind kind) {
    if (auto error = validate_clip(clip)) {
        throw std::invalid_argument("cannot pool invalid clip: " + *error);
    }
    std::vector<double> out(clip.classes.size());
    for (std::size_t c = 0; c < clip.classes.size(); ++c) {
        const auto column = clip.probs.column(c);
        out[c] = pool_clip(column, kind);
    }
    return out;
}

}  // namespace sedkit
