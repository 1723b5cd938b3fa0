#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "eqbayes/errors.hpp"
#include "eqbayes/matrix.hpp"
#include "eqbayes/rng.hpp"

namespace eqbayes {

enum class Activation { Tanh, Identity };

inline std::string activation_name(Activation a) {
    return a == Activation::Tanh ? "tanh" : "identity";
}

inline Activation activation_from_name(const std::string& s) {
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw FormatVersionMismatch("unknown activation: " + s);
}

/// One shared feedforward network: hidden layers use the configured
/// activation, the output layer is linear. Weights are stored per layer as
/// (fan_in x fan_out) matrices so a batch forward is `X * W + b`.
struct MlpParams {
    std::vector<std::size_t> layer_sizes;  // [in, hidden..., out]
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    Activation activation = Activation::Tanh;

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t output_dim() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l)
            n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
        return n;
    }

    void validate() const {
        if (layer_sizes.size() < 2)
            throw ShapeMismatch("MlpParams: need at least input and output sizes");
        if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
            throw ShapeMismatch("MlpParams: layer count mismatch");
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (weights[l].rows() != layer_sizes[l] || weights[l].cols() != layer_sizes[l + 1])
                throw ShapeMismatch("MlpParams: weight shape mismatch at layer " +
                                    std::to_string(l));
            if (biases[l].size() != layer_sizes[l + 1])
                throw ShapeMismatch("MlpParams: bias shape mismatch at layer " +
                                    std::to_string(l));
        }
    }

    /// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
    static MlpParams create(const std::vector<std::size_t>& sizes, Rng& rng,
                            Activation act = Activation::Tanh) {
        if (sizes.size() < 2)
            throw ShapeMismatch("MlpParams::create: need at least two sizes");
        MlpParams p;
        p.layer_sizes = sizes;
        p.activation = act;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            Matrix w(fan_in, fan_out);
            for (double& v : w.data()) v = rng.uniform(-bound, bound);
            p.weights.push_back(std::move(w));
            p.biases.emplace_back(fan_out, 0.0);
        }
        return p;
    }

    std::vector<double> flatten() const {
        std::vector<double> flat;
        flat.reserve(parameter_count());
        for (std::size_t l = 0; l < weights.size(); ++l) {
            flat.insert(flat.end(), weights[l].data().begin(), weights[l].data().end());
            flat.insert(flat.end(), biases[l].begin(), biases[l].end());
        }
        return flat;
    }

    void unflatten(const std::vector<double>& flat, std::size_t& offset) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            for (double& v : weights[l].data()) v = flat[offset++];
            for (double& v : biases[l]) v = flat[offset++];
        }
    }
};

/// Activations of each layer kept for the backward pass. post[l] is the
/// output of layer l after its nonlinearity; post.back() is the network
/// output (linear).
struct MlpCache {
    Matrix input;
    std::vector<Matrix> post;
};

struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    static MlpGrads zeros_like(const MlpParams& p) {
        MlpGrads g;
        for (std::size_t l = 0; l < p.weights.size(); ++l) {
            g.weights.emplace_back(p.weights[l].rows(), p.weights[l].cols());
            g.biases.emplace_back(p.biases[l].size(), 0.0);
        }
        return g;
    }

    void accumulate(const MlpGrads& o) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            weights[l] += o.weights[l];
            for (std::size_t k = 0; k < biases[l].size(); ++k) biases[l][k] += o.biases[l][k];
        }
    }

    void scale(double s) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            weights[l] *= s;
            for (double& v : biases[l]) v *= s;
        }
    }

    std::vector<double> flatten() const {
        std::vector<double> flat;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            flat.insert(flat.end(), weights[l].data().begin(), weights[l].data().end());
            flat.insert(flat.end(), biases[l].begin(), biases[l].end());
        }
        return flat;
    }
};

/// Batched forward pass; rows of `inputs` are independent samples.
inline Matrix mlp_forward(const MlpParams& p, const Matrix& inputs, MlpCache* cache = nullptr) {
    if (inputs.cols() != p.input_dim())
        throw ShapeMismatch("mlp_forward: input width " + std::to_string(inputs.cols()) +
                            " != first layer size " + std::to_string(p.input_dim()));
    if (cache) {
        cache->input = inputs;
        cache->post.clear();
    }
    Matrix a = inputs;
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        Matrix z = a * p.weights[l];
        for (std::size_t i = 0; i < z.rows(); ++i) {
            double* zi = z.row_ptr(i);
            for (std::size_t j = 0; j < z.cols(); ++j) zi[j] += p.biases[l][j];
        }
        const bool hidden = l + 1 < p.weights.size();
        if (hidden && p.activation == Activation::Tanh)
            for (double& v : z.data()) v = std::tanh(v);
        a = std::move(z);
        if (cache) cache->post.push_back(a);
    }
    return a;
}

/// Exact gradients for the affine+activation chain. Accumulates parameter
/// gradients into `grads` (caller zero-initializes) and returns gradients
/// with respect to the inputs.
inline Matrix mlp_backward(const MlpParams& p, const MlpCache& cache, const Matrix& output_grad,
                           MlpGrads& grads) {
    const std::size_t layers = p.weights.size();
    if (cache.post.size() != layers)
        throw ShapeMismatch("mlp_backward: cache does not match network depth");
    if (output_grad.rows() != cache.input.rows() || output_grad.cols() != p.output_dim())
        throw ShapeMismatch("mlp_backward: output_grad shape mismatch");

    Matrix delta = output_grad;  // dLoss/dz for the current layer
    for (std::size_t l = layers; l-- > 0;) {
        if (l + 1 < layers && p.activation == Activation::Tanh) {
            // delta arrives as dLoss/da for hidden layers; fold in tanh'.
            const Matrix& a = cache.post[l];
            for (std::size_t k = 0; k < delta.size(); ++k)
                delta.data()[k] *= 1.0 - a.data()[k] * a.data()[k];
        }
        const Matrix& layer_in = (l == 0) ? cache.input : cache.post[l - 1];
        grads.weights[l] += matmul_at_b(layer_in, delta);
        for (std::size_t i = 0; i < delta.rows(); ++i) {
            const double* di = delta.row_ptr(i);
            for (std::size_t j = 0; j < delta.cols(); ++j) grads.biases[l][j] += di[j];
        }
        if (l > 0) delta = matmul_a_bt(delta, p.weights[l]);
    }
    return matmul_a_bt(delta, p.weights[0]);
}

}  // namespace eqbayes
