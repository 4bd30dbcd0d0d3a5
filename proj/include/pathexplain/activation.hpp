#pragma once
// Elementwise activations with first and second derivatives. Second-order
// attribution methods require twice-differentiable activations; ReLU reports
// that it is not and its second_deriv throws.

#include <cmath>
#include <string>

#include "pathexplain/common.hpp"

namespace pathexplain {

enum class Act { identity, relu, softplus, tanh, sigmoid, gelu };

inline const char* act_name(Act a) {
    switch (a) {
        case Act::identity: return "identity";
        case Act::relu: return "relu";
        case Act::softplus: return "softplus";
        case Act::tanh: return "tanh";
        case Act::sigmoid: return "sigmoid";
        case Act::gelu: return "gelu";
    }
    return "?";
}

inline Act act_from_name(const std::string& name) {
    if (name == "identity") return Act::identity;
    if (name == "relu") return Act::relu;
    if (name == "softplus") return Act::softplus;
    if (name == "tanh") return Act::tanh;
    if (name == "sigmoid") return Act::sigmoid;
    if (name == "gelu") return Act::gelu;
    throw input_error("unknown activation kind: '" + name + "'");
}

namespace detail {
inline double stable_sigmoid(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}
inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}
inline double normal_cdf(double x) {
    static const double inv_sqrt_2 = 0.7071067811865475244;
    return 0.5 * std::erfc(-x * inv_sqrt_2);
}
}  // namespace detail

/// Activation kind plus its sharpness parameter (SoftPlus only).
/// softplus_beta(x) = (1/beta) * log(1 + exp(beta*x)), which approaches ReLU
/// as beta grows and matches the ReLU's output on saturated inputs.
struct Activation {
    Act kind = Act::identity;
    double beta = 1.0;

    Activation() = default;
    explicit Activation(Act k, double b = 1.0) : kind(k), beta(b) {
        if (kind == Act::softplus && !(beta > 0.0))
            throw input_error("softplus beta must be positive");
    }

    bool twice_differentiable() const { return kind != Act::relu; }

    double value(double x) const {
        switch (kind) {
            case Act::identity: return x;
            case Act::relu: return x > 0.0 ? x : 0.0;
            case Act::softplus: {
                double t = beta * x;
                // log1p(exp(t))/beta, rewritten to avoid overflow for large t
                if (t > 0.0) return x + std::log1p(std::exp(-t)) / beta;
                return std::log1p(std::exp(t)) / beta;
            }
            case Act::tanh: return std::tanh(x);
            case Act::sigmoid: return detail::stable_sigmoid(x);
            case Act::gelu: return x * detail::normal_cdf(x);
        }
        return 0.0;
    }

    double deriv(double x) const {
        switch (kind) {
            case Act::identity: return 1.0;
            case Act::relu: return x > 0.0 ? 1.0 : 0.0;  // subgradient at 0 fixed to 0
            case Act::softplus: return detail::stable_sigmoid(beta * x);
            case Act::tanh: {
                double t = std::tanh(x);
                return 1.0 - t * t;
            }
            case Act::sigmoid: {
                double s = detail::stable_sigmoid(x);
                return s * (1.0 - s);
            }
            case Act::gelu: return detail::normal_cdf(x) + x * detail::normal_pdf(x);
        }
        return 0.0;
    }

    double second_deriv(double x) const {
        switch (kind) {
            case Act::identity: return 0.0;
            case Act::relu:
                throw contract_error(
                    "relu has no second derivative; replace it via softplus_surgery "
                    "before using a second-order method");
            case Act::softplus: {
                double s = detail::stable_sigmoid(beta * x);
                return beta * s * (1.0 - s);
            }
            case Act::tanh: {
                double t = std::tanh(x);
                return -2.0 * t * (1.0 - t * t);
            }
            case Act::sigmoid: {
                double s = detail::stable_sigmoid(x);
                return s * (1.0 - s) * (1.0 - 2.0 * s);
            }
            case Act::gelu: return detail::normal_pdf(x) * (2.0 - x * x);
        }
        return 0.0;
    }
};

}  // namespace pathexplain
