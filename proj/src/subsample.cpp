// Copyright sedkit contributors
// SPDX-License-Identifier: Apache-2.0

#include "sedkit/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sedkit/rng.hpp"

namespace sedkit {
namespace {

double mean_of(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) {
        sum += v;
    }
    return sum / static_cast<double>(x.size());
}

double max_of(std::span<const double> x) {
    return *std::max_element(x.begin(), x.end());
}

std::size_t argmax_of(std::span<const double> x) {
    return static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
}

bool is_integral(double p) { return std::floor(p) == p; }

void check_lp_domain(std::span<const double> x, double p) {
    if (is_integral(p)) {
        return;
    }
    for (double v : x) {
        if (v < 0.0) {
            throw std::invalid_argument("lp requires non-negative input");
        }
    }
}

// Raw evaluators, shared by the forward path, the analytic gradients and
// the finite-difference harness. They accept off-manifold parameters
// (e.g. p slightly below 1) so central differences at the domain edge are
// well defined.
double mm_value(std::span<const double> x) { return mean_of(x) + max_of(x); }

double amm_value(std::span<const double> x, double alpha) {
    return alpha * max_of(x) + (1.0 - alpha) * mean_of(x);
}

double lp_value(std::span<const double> x, double p) {
    check_lp_domain(x, p);
    if (p == 1.0) {
        return mean_of(x);
    }
    double sum = 0.0;
    for (double v : x) {
        sum += std::pow(v, p);
    }
    const double power_mean = sum / static_cast<double>(x.size());
    if (power_mean < 0.0) {
        throw std::invalid_argument("lp requires non-negative input");
    }
    return std::pow(power_mean, 1.0 / p);
}

double conv_value(std::span<const double> x, const ConvPool& conv) {
    if (x.size() != conv.kernel_size * conv.kernel_size) {
        throw std::invalid_argument("conv window length must equal K*K");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += conv.weights[i] * x[i];
    }
    return sum;
}

void check_window(std::span<const double> window) {
    if (window.empty()) {
        throw std::invalid_argument("subsample window must be non-empty");
    }
}

}  // namespace

ConvPool ConvPool::uniform(std::size_t k) {
    ConvPool conv;
    conv.kernel_size = k;
    conv.weights.assign(k * k, 1.0 / static_cast<double>(k * k));
    return conv;
}

ConvPool ConvPool::seeded_random(std::size_t k, std::uint64_t seed) {
    ConvPool conv;
    conv.kernel_size = k;
    conv.weights.resize(k * k);
    SplitMix64 rng(seed);
    for (double& w : conv.weights) {
        w = rng.uniform(-1.0, 1.0);
    }
    return conv;
}

void validate(const SubsampleKind& kind) {
    std::visit(
        [](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, AlphaMeanMax>) {
                if (!(k.alpha >= 0.0 && k.alpha <= 1.0)) {
                    throw std::invalid_argument("alpha must lie in [0,1]");
                }
            } else if constexpr (std::is_same_v<T, LpPool>) {
                if (!(k.p >= 1.0) || !std::isfinite(k.p)) {
                    throw std::invalid_argument("lp exponent must satisfy p >= 1");
                }
            } else if constexpr (std::is_same_v<T, ConvPool>) {
                if (k.kernel_size < 1) {
                    throw std::invalid_argument("conv kernel side must be >= 1");
                }
                if (k.weights.size() != k.kernel_size * k.kernel_size) {
                    throw std::invalid_argument("conv kernel must be square (K*K weights)");
                }
            }
        },
        kind);
}

std::string kind_name(const SubsampleKind& kind) {
    return std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, MeanMax>) {
                return "mm";
            } else if constexpr (std::is_same_v<T, AlphaMeanMax>) {
                return "alpha_mm";
            } else if constexpr (std::is_same_v<T, LpPool>) {
                return "lp";
            } else {
                return "conv";
            }
        },
        kind);
}

void validate(const SubsampleConfig& config) {
    if (layers_to_factor(config.layers) != config.factor) {
        throw std::invalid_argument("layer strides do not multiply to the factor");
    }
}

std::array<int, 4> factor_to_layers(int k) {
    switch (k) {
        case 1: return {1, 1, 1, 1};
        case 2: return {2, 1, 1, 1};
        case 4: return {2, 2, 1, 1};
        case 8: return {2, 2, 2, 1};
        case 16: return {2, 2, 2, 2};
        default:
            throw std::invalid_argument("subsampling factor must be one of 1,2,4,8,16");
    }
}

int layers_to_factor(const std::array<int, 4>& layers) {
    int product = 1;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i] != 1 && layers[i] != 2) {
            throw std::invalid_argument("layer strides must be 1 or 2");
        }
        if (i > 0 && layers[i] > layers[i - 1]) {
            throw std::invalid_argument("layer strides must be non-increasing");
        }
        product *= layers[i];
    }
    return product;
}

double subsample_window(std::span<const double> window, const SubsampleKind& kind) {
    check_window(window);
    validate(kind);
    return std::visit(
        [&](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, MeanMax>) {
                return mm_value(window);
            } else if constexpr (std::is_same_v<T, AlphaMeanMax>) {
                return amm_value(window, k.alpha);
            } else if constexpr (std::is_same_v<T, LpPool>) {
                return lp_value(window, k.p);
            } else {
                return conv_value(window, k);
            }
        },
        kind);
}

WindowGradient subsample_window_gradient(std::span<const double> window,
                                         const SubsampleKind& kind) {
    check_window(window);
    validate(kind);
    const std::size_t n = window.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    WindowGradient out;
    out.d_window.assign(n, 0.0);

    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, MeanMax>) {
                out.value = mm_value(window);
                for (std::size_t i = 0; i < n; ++i) {
                    out.d_window[i] = inv_n;
                }
                out.d_window[argmax_of(window)] += 1.0;
            } else if constexpr (std::is_same_v<T, AlphaMeanMax>) {
                out.value = amm_value(window, k.alpha);
                for (std::size_t i = 0; i < n; ++i) {
                    out.d_window[i] = (1.0 - k.alpha) * inv_n;
                }
                out.d_window[argmax_of(window)] += k.alpha;
                out.d_params = {max_of(window) - mean_of(window)};
            } else if constexpr (std::is_same_v<T, LpPool>) {
                const double p = k.p;
                out.value = lp_value(window, p);
                double sum_pow = 0.0;
                double sum_pow_log = 0.0;  // sum of x^p * ln x, with 0*ln 0 := 0
                for (double v : window) {
                    const double vp = std::pow(v, p);
                    sum_pow += vp;
                    if (v > 0.0) {
                        sum_pow_log += vp * std::log(v);
                    }
                }
                const double power_mean = sum_pow * inv_n;
                // d/dx_i of (S/n)^(1/p) = (S/n)^(1/p - 1) * x_i^(p-1) / n
                const double outer =
                    power_mean > 0.0 ? std::pow(power_mean, 1.0 / p - 1.0) : 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    out.d_window[i] = outer * std::pow(window[i], p - 1.0) * inv_n;
                }
                // d/dp via ln f = ln(S/n)/p.
                double d_p = 0.0;
                if (power_mean > 0.0 && sum_pow > 0.0) {
                    d_p = out.value * (-std::log(power_mean) / (p * p) +
                                       sum_pow_log / (p * sum_pow));
                }
                out.d_params = {d_p};
            } else {
                out.value = conv_value(window, k);
                out.d_params.assign(n, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    out.d_window[i] = k.weights[i];
                    out.d_params[i] = window[i];
                }
            }
        },
        kind);
    return out;
}

Matrix subsample_map(const Matrix& feature, std::size_t time_stride,
                     std::size_t feat_stride, const SubsampleKind& kind) {
    if (feature.empty()) {
        throw std::invalid_argument("subsample_map requires a non-empty feature map");
    }
    if (time_stride < 1 || feat_stride < 1) {
        throw std::invalid_argument("strides must be >= 1");
    }
    validate(kind);
    const std::size_t out_rows = (feature.rows() + time_stride - 1) / time_stride;
    const std::size_t out_cols = (feature.cols() + feat_stride - 1) / feat_stride;
    Matrix out(out_rows, out_cols);

    const ConvPool* conv = std::get_if<ConvPool>(&kind);
    if (conv != nullptr &&
        (conv->kernel_size != time_stride || conv->kernel_size != feat_stride)) {
        throw std::invalid_argument("conv kernel shape must match the pooling window");
    }

    std::vector<double> window;
    window.reserve(time_stride * feat_stride);
    for (std::size_t br = 0; br < out_rows; ++br) {
        for (std::size_t bc = 0; bc < out_cols; ++bc) {
            const std::size_t r0 = br * time_stride;
            const std::size_t c0 = bc * feat_stride;
            const std::size_t r1 = std::min(r0 + time_stride, feature.rows());
            const std::size_t c1 = std::min(c0 + feat_stride, feature.cols());
            if (conv != nullptr) {
                // Partial edge window: dot with the overlapping sub-kernel.
                double sum = 0.0;
                for (std::size_t r = r0; r < r1; ++r) {
                    for (std::size_t c = c0; c < c1; ++c) {
                        sum += conv->weights[(r - r0) * conv->kernel_size + (c - c0)] *
                               feature(r, c);
                    }
                }
                out(br, bc) = sum;
            } else {
                window.clear();
                for (std::size_t r = r0; r < r1; ++r) {
                    for (std::size_t c = c0; c < c1; ++c) {
                        window.push_back(feature(r, c));
                    }
                }
                out(br, bc) = subsample_window(window, kind);
            }
        }
    }
    return out;
}

namespace {

// Windows are drawn from [0.05, 1] with pairwise gaps >= 1e-3 so the
// max/argmax terms are differentiable across the +-1e-5 probe step.
std::vector<double> draw_window(SplitMix64& rng, std::size_t n) {
    std::vector<double> window(n);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (double& v : window) {
            v = rng.uniform(0.05, 1.0);
        }
        bool separated = true;
        for (std::size_t i = 0; i < n && separated; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::abs(window[i] - window[j]) < 1e-3) {
                    separated = false;
                    break;
                }
            }
        }
        if (separated) {
            return window;
        }
    }
    throw std::runtime_error("could not draw a tie-free gradcheck window");
}

double relative_error(double analytic, double fd) {
    return std::abs(analytic - fd) /
           std::max({1.0, std::abs(analytic), std::abs(fd)});
}

double eval_kind(std::span<const double> x, const SubsampleKind& kind, double alpha,
                 double p, const std::vector<double>& weights, std::size_t kernel) {
    if (std::holds_alternative<MeanMax>(kind)) {
        return mm_value(x);
    }
    if (std::holds_alternative<AlphaMeanMax>(kind)) {
        return amm_value(x, alpha);
    }
    if (std::holds_alternative<LpPool>(kind)) {
        return lp_value(x, p);
    }
    ConvPool conv;
    conv.kernel_size = kernel;
    conv.weights = weights;
    return conv_value(x, conv);
}

}  // namespace

GradcheckReport gradcheck(const SubsampleKind& kind, int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("gradcheck requires trials >= 1");
    }
    validate(kind);

    constexpr double kStep = 1e-5;
    GradcheckReport report;
    report.kind = kind_name(kind);
    report.trials = trials;
    report.seed = seed;

    SplitMix64 rng(seed);
    const ConvPool* conv = std::get_if<ConvPool>(&kind);
    const AlphaMeanMax* amm = std::get_if<AlphaMeanMax>(&kind);
    const LpPool* lp = std::get_if<LpPool>(&kind);

    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t n = conv != nullptr
                                  ? conv->kernel_size * conv->kernel_size
                                  : 2 + static_cast<std::size_t>(rng.uniform_int(5));
        std::vector<double> window = draw_window(rng, n);
        const double alpha = amm != nullptr ? amm->alpha : 0.0;
        const double p = lp != nullptr ? lp->p : 0.0;
        const std::vector<double> weights =
            conv != nullptr ? conv->weights : std::vector<double>{};
        const std::size_t kernel = conv != nullptr ? conv->kernel_size : 0;

        const WindowGradient grad = subsample_window_gradient(window, kind);

        for (std::size_t i = 0; i < n; ++i) {
            const double saved = window[i];
            window[i] = saved + kStep;
            const double hi = eval_kind(window, kind, alpha, p, weights, kernel);
            window[i] = saved - kStep;
            const double lo = eval_kind(window, kind, alpha, p, weights, kernel);
            window[i] = saved;
            const double fd = (hi - lo) / (2.0 * kStep);
            report.max_relative_error =
                std::max(report.max_relative_error, relative_error(grad.d_window[i], fd));
        }

        if (amm != nullptr) {
            const double hi = eval_kind(window, kind, alpha + kStep, p, weights, kernel);
            const double lo = eval_kind(window, kind, alpha - kStep, p, weights, kernel);
            const double fd = (hi - lo) / (2.0 * kStep);
            report.max_relative_error =
                std::max(report.max_relative_error, relative_error(grad.d_params[0], fd));
        } else if (lp != nullptr) {
            const double hi = eval_kind(window, kind, alpha, p + kStep, weights, kernel);
            const double lo = eval_kind(window, kind, alpha, p - kStep, weights, kernel);
            const double fd = (hi - lo) / (2.0 * kStep);
            report.max_relative_error =
                std::max(report.max_relative_error, relative_error(grad.d_params[0], fd));
        } else if (conv != nullptr) {
            std::vector<double> probe = weights;
            for (std::size_t i = 0; i < probe.size(); ++i) {
                const double saved = probe[i];
                probe[i] = saved + kStep;
                const double hi = eval_kind(window, kind, alpha, p, probe, kernel);
                probe[i] = saved - kStep;
                const double lo = eval_kind(window, kind, alpha, p, probe, kernel);
                probe[i] = saved;
                const double fd = (hi - lo) / (2.0 * kStep);
                report.max_relative_error = std::max(report.max_relative_error,
                                                     relative_error(grad.d_params[i], fd));
            }
        }
    }

    report.pass = report.max_relative_error < report.tolerance;
    return report;
}

}  // namespace sedkit
