#pragma once
// Feed-forward dense network over doubles with exact first- and second-order
// oracles: reverse-mode gradient, forward-over-reverse Hessian-vector
// products, and a full Hessian assembled from HVP columns. A multi-output
// final layer plus an output selector makes every network a scalar function
// f : R^d -> R, which is what all attribution methods differentiate.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pathexplain/activation.hpp"
#include "pathexplain/common.hpp"
#include "pathexplain/linalg.hpp"

namespace pathexplain {

struct Layer {
    Mat weights;     // (out x in), row-major
    Vec bias;        // (out)
    Activation act;  // applied elementwise to weights*x + bias
};

/// Primal evaluation record reused by gradient/HVP sweeps at the same input.
struct EvalTape {
    std::vector<Vec> z;  // pre-activations per layer
    std::vector<Vec> a;  // a[0] = x, a[l+1] = act(z[l])
};

class DenseNetwork {
public:
    DenseNetwork() = default;

    DenseNetwork(std::size_t input_dim, std::vector<Layer> layers, std::size_t output_index = 0)
        : input_dim_(input_dim), layers_(std::move(layers)), output_index_(output_index) {
        validate();
    }

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return layers_.back().weights.rows; }
    std::size_t output_index() const { return output_index_; }
    std::size_t n_layers() const { return layers_.size(); }
    const Layer& layer(std::size_t i) const { return layers_[i]; }
    Layer& layer(std::size_t i) { return layers_[i]; }
    const std::vector<Layer>& layers() const { return layers_; }

    void set_output_index(std::size_t idx) {
        if (idx >= output_dim())
            throw input_error("output_index " + std::to_string(idx) +
                              " out of range for output dimension " +
                              std::to_string(output_dim()));
        output_index_ = idx;
    }

    /// Index of the first layer whose activation lacks a second derivative,
    /// or n_layers() if every layer is twice differentiable.
    std::size_t first_non_smooth_layer() const {
        for (std::size_t l = 0; l < layers_.size(); ++l)
            if (!layers_[l].act.twice_differentiable()) return l;
        return layers_.size();
    }

    void require_twice_differentiable(const std::string& op) const {
        std::size_t l = first_non_smooth_layer();
        if (l < layers_.size())
            throw contract_error(op + " requires twice-differentiable activations, but layer " +
                                 std::to_string(l) + " uses " +
                                 std::string(act_name(layers_[l].act.kind)) +
                                 "; apply softplus_surgery (CLI: --surgery-beta) first");
    }

    // -- primal ------------------------------------------------------------

    EvalTape make_tape(const Vec& x) const {
        check_input(x);
        EvalTape t;
        t.z.resize(layers_.size());
        t.a.resize(layers_.size() + 1);
        t.a[0] = x;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            affine(layers_[l].weights, layers_[l].bias, t.a[l], t.z[l]);
            const Vec& z = t.z[l];
            Vec& a = t.a[l + 1];
            a.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) a[i] = layers_[l].act.value(z[i]);
        }
        return t;
    }

    /// Selected scalar output.
    double forward(const Vec& x) const { return make_tape(x).a.back()[output_index_]; }

    /// Full output vector of the final layer (before selection).
    Vec forward_outputs(const Vec& x) const { return make_tape(x).a.back(); }

    // -- first order ---------------------------------------------------------

    Vec gradient_with_tape(const EvalTape& t) const {
        // Reverse sweep seeded with the output selector's one-hot.
        std::size_t L = layers_.size();
        Vec abar(t.a[L].size(), 0.0);
        abar[output_index_] = 1.0;
        Vec zbar, prev;
        for (std::size_t l = L; l-- > 0;) {
            const Vec& z = t.z[l];
            zbar.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i)
                zbar[i] = abar[i] * layers_[l].act.deriv(z[i]);
            matvec_transpose(layers_[l].weights, zbar, prev);
            abar = prev;
        }
        return abar;
    }

    Vec gradient(const Vec& x) const { return gradient_with_tape(make_tape(x)); }

    // -- second order --------------------------------------------------------

    /// Exact Hessian-vector product H(x) * v by forward-over-reverse:
    /// a tangent sweep propagates v, then a reverse sweep carries the
    /// adjoint and its directional derivative together.
    Vec hvp_with_tape(const EvalTape& t, const Vec& v) const {
        require_twice_differentiable("hvp");
        if (v.size() != input_dim_) throw input_error("hvp: direction size mismatch");
        std::size_t L = layers_.size();

        // Forward tangent sweep: zdot[l] = W_l * adot_{l-1}.
        std::vector<Vec> zdot(L);
        Vec adot = v, next;
        for (std::size_t l = 0; l < L; ++l) {
            zdot[l].resize(t.z[l].size());
            const Mat& w = layers_[l].weights;
            for (std::size_t r = 0; r < w.rows; ++r)
                zdot[l][r] = dot(w.row(r), adot.data(), w.cols);
            adot.resize(t.z[l].size());
            for (std::size_t i = 0; i < adot.size(); ++i)
                adot[i] = layers_[l].act.deriv(t.z[l][i]) * zdot[l][i];
        }

        // Reverse sweep with dual numbers (abar, abar_dot).
        Vec abar(t.a[L].size(), 0.0), abar_dot(t.a[L].size(), 0.0);
        abar[output_index_] = 1.0;
        Vec zbar, zbar_dot, prev, prev_dot;
        for (std::size_t l = L; l-- > 0;) {
            const Vec& z = t.z[l];
            zbar.resize(z.size());
            zbar_dot.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) {
                double d1 = layers_[l].act.deriv(z[i]);
                double d2 = layers_[l].act.second_deriv(z[i]);
                zbar[i] = abar[i] * d1;
                zbar_dot[i] = abar_dot[i] * d1 + abar[i] * d2 * zdot[l][i];
            }
            matvec_transpose(layers_[l].weights, zbar, prev);
            matvec_transpose(layers_[l].weights, zbar_dot, prev_dot);
            abar = prev;
            abar_dot = prev_dot;
        }
        return abar_dot;
    }

    Vec hvp(const Vec& x, const Vec& v) const { return hvp_with_tape(make_tape(x), v); }

    /// Full d x d Hessian from d HVP columns, with a symmetry self-check.
    Mat hessian_with_tape(const EvalTape& t) const {
        require_twice_differentiable("hessian");
        std::size_t d = input_dim_;
        Mat h(d, d);
        Vec e(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            e[i] = 1.0;
            Vec col = hvp_with_tape(t, e);
            e[i] = 0.0;
            for (std::size_t r = 0; r < d; ++r) h(r, i) = col[r];
        }
        // Forward-over-reverse is exact, so the two triangles may differ only
        // by float noise; a larger gap means a derivative bug upstream.
        double tol = 1e-8 * std::max(1.0, max_abs(h));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                double gap = std::abs(h(i, j) - h(j, i));
                if (!(gap <= tol))
                    throw contract_error("hessian symmetry self-check failed at (" +
                                         std::to_string(i) + "," + std::to_string(j) +
                                         "): gap " + format_double(gap));
                double s = 0.5 * (h(i, j) + h(j, i));
                h(i, j) = s;
                h(j, i) = s;
            }
        return h;
    }

    Mat hessian(const Vec& x) const { return hessian_with_tape(make_tape(x)); }

private:
    void check_input(const Vec& x) const {
        if (x.size() != input_dim_)
            throw input_error("input has " + std::to_string(x.size()) + " features, network expects " +
                              std::to_string(input_dim_));
    }

    void validate() const {
        if (layers_.empty()) throw input_error("network must have at least one layer");
        std::size_t in = input_dim_;
        if (in == 0) throw input_error("input_dim must be positive");
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& ly = layers_[l];
            if (ly.weights.cols != in)
                throw input_error("layer " + std::to_string(l) + " expects " +
                                  std::to_string(ly.weights.cols) + " inputs but receives " +
                                  std::to_string(in));
            if (ly.bias.size() != ly.weights.rows)
                throw input_error("layer " + std::to_string(l) + " bias size " +
                                  std::to_string(ly.bias.size()) + " != rows " +
                                  std::to_string(ly.weights.rows));
            if (ly.weights.rows == 0) throw input_error("layer " + std::to_string(l) + " has zero units");
            in = ly.weights.rows;
        }
        if (output_index_ >= layers_.back().weights.rows)
            throw input_error("output_index " + std::to_string(output_index_) +
                              " out of range for output dimension " +
                              std::to_string(layers_.back().weights.rows));
    }

    std::size_t input_dim_ = 0;
    std::vector<Layer> layers_;
    std::size_t output_index_ = 0;
};

/// Returns a copy of the network with every ReLU replaced by SoftPlus(beta);
/// all other activations and every weight are untouched. Large beta keeps the
/// function close to the original while restoring twice-differentiability.
inline DenseNetwork softplus_surgery(const DenseNetwork& net, double beta) {
    if (!(beta > 0.0)) throw input_error("softplus_surgery: beta must be positive");
    std::vector<Layer> layers;
    layers.reserve(net.n_layers());
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        Layer ly = net.layer(l);
        if (ly.act.kind == Act::relu) ly.act = Activation(Act::softplus, beta);
        layers.push_back(std::move(ly));
    }
    return DenseNetwork(net.input_dim(), std::move(layers), net.output_index());
}

}  // namespace pathexplain
