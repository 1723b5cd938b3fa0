#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "eqbayes/errors.hpp"
#include "eqbayes/matrix.hpp"
#include "eqbayes/mlp.hpp"

namespace eqbayes {

// Both operators follow the embedding-averaging-fitting pattern: a shared
// per-element embedding, a mean pool (never a sum, so set-size changes do
// not rescale embeddings), and a shared fitting network. Elements are the
// rows of an N x p matrix; the same parameters evaluate at any N >= 1.

/// Set-to-vector operator: fit(mean_i embed(x_i)). Output is independent of
/// element order.
struct InvariantOperatorParams {
    MlpParams embed_net;  // R^p -> R^h
    MlpParams fit_net;    // R^h -> R^q

    void validate() const {
        embed_net.validate();
        fit_net.validate();
        if (embed_net.output_dim() != fit_net.input_dim())
            throw ShapeMismatch("invariant operator: embed output != fit input width");
    }

    static InvariantOperatorParams create(std::size_t element_dim,
                                          const std::vector<std::size_t>& embed_hidden,
                                          std::size_t embed_dim,
                                          const std::vector<std::size_t>& fit_hidden,
                                          std::size_t output_dim, Rng& rng) {
        InvariantOperatorParams p;
        std::vector<std::size_t> e{element_dim};
        e.insert(e.end(), embed_hidden.begin(), embed_hidden.end());
        e.push_back(embed_dim);
        p.embed_net = MlpParams::create(e, rng);
        std::vector<std::size_t> f{embed_dim};
        f.insert(f.end(), fit_hidden.begin(), fit_hidden.end());
        f.push_back(output_dim);
        p.fit_net = MlpParams::create(f, rng);
        return p;
    }
};

inline std::vector<double> invariant_forward(const InvariantOperatorParams& p,
                                             const Matrix& elements) {
    if (elements.rows() == 0) throw EmptySet("invariant_forward: empty element set");
    const Matrix embedded = mlp_forward(p.embed_net, elements);
    // Mean pool in ascending row order.
    Matrix pooled(1, embedded.cols());
    for (std::size_t i = 0; i < embedded.rows(); ++i)
        for (std::size_t j = 0; j < embedded.cols(); ++j) pooled(0, j) += embedded(i, j);
    pooled *= 1.0 / static_cast<double>(embedded.rows());
    return mlp_forward(p.fit_net, pooled).row(0);
}

/// Set-to-set operator: out_i = fit(self(x_i) (+) mean_j int(x_j) (+) cond).
/// Reordering the input rows reorders the output rows identically. The
/// optional conditioning vector enters only the fitting network.
struct EquivariantOperatorParams {
    MlpParams self_net;  // R^p -> R^{h1}
    MlpParams int_net;   // R^p -> R^{h2}
    MlpParams fit_net;   // R^{h1+h2+c} -> R^q

    std::size_t conditioning_dim() const {
        return fit_net.input_dim() - self_net.output_dim() - int_net.output_dim();
    }

    void validate() const {
        self_net.validate();
        int_net.validate();
        fit_net.validate();
        if (self_net.input_dim() != int_net.input_dim())
            throw ShapeMismatch("equivariant operator: self/int input widths differ");
        if (fit_net.input_dim() < self_net.output_dim() + int_net.output_dim())
            throw ShapeMismatch("equivariant operator: fit input narrower than embeddings");
    }

    static EquivariantOperatorParams create(std::size_t element_dim,
                                            const std::vector<std::size_t>& hidden,
                                            std::size_t embed_dim, std::size_t conditioning_dim,
                                            std::size_t output_dim, Rng& rng) {
        EquivariantOperatorParams p;
        std::vector<std::size_t> e{element_dim};
        e.insert(e.end(), hidden.begin(), hidden.end());
        e.push_back(embed_dim);
        p.self_net = MlpParams::create(e, rng);
        p.int_net = MlpParams::create(e, rng);
        std::vector<std::size_t> f{2 * embed_dim + conditioning_dim};
        f.insert(f.end(), hidden.begin(), hidden.end());
        f.push_back(output_dim);
        p.fit_net = MlpParams::create(f, rng);
        return p;
    }

    std::vector<double> flatten() const {
        std::vector<double> flat = self_net.flatten();
        const auto i = int_net.flatten();
        const auto f = fit_net.flatten();
        flat.insert(flat.end(), i.begin(), i.end());
        flat.insert(flat.end(), f.begin(), f.end());
        return flat;
    }

    void unflatten(const std::vector<double>& flat) {
        std::size_t offset = 0;
        self_net.unflatten(flat, offset);
        int_net.unflatten(flat, offset);
        fit_net.unflatten(flat, offset);
        if (offset != flat.size())
            throw ShapeMismatch("equivariant operator: flat size mismatch");
    }
};

struct EquivariantCache {
    MlpCache self_cache;
    MlpCache int_cache;
    MlpCache fit_cache;
    std::vector<double> pooled;        // mean of int embeddings
    std::vector<double> conditioning;  // empty if none
    std::size_t n_elements = 0;
};

inline Matrix equivariant_forward(const EquivariantOperatorParams& p, const Matrix& elements,
                                  const std::vector<double>* conditioning = nullptr,
                                  EquivariantCache* cache = nullptr) {
    const std::size_t n = elements.rows();
    if (n == 0) throw EmptySet("equivariant_forward: empty element set");
    const std::size_t cond_dim = conditioning ? conditioning->size() : 0;
    if (p.self_net.output_dim() + p.int_net.output_dim() + cond_dim != p.fit_net.input_dim())
        throw ShapeMismatch("equivariant_forward: conditioning width mismatch");

    MlpCache self_cache, int_cache, fit_cache;
    const Matrix self_emb = mlp_forward(p.self_net, elements, cache ? &self_cache : nullptr);
    const Matrix int_emb = mlp_forward(p.int_net, elements, cache ? &int_cache : nullptr);

    std::vector<double> pooled(int_emb.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < pooled.size(); ++j) pooled[j] += int_emb(i, j);
    for (double& v : pooled) v /= static_cast<double>(n);

    Matrix fit_in(n, p.fit_net.input_dim());
    const std::size_t h1 = self_emb.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* r = fit_in.row_ptr(i);
        for (std::size_t j = 0; j < h1; ++j) r[j] = self_emb(i, j);
        for (std::size_t j = 0; j < pooled.size(); ++j) r[h1 + j] = pooled[j];
        for (std::size_t j = 0; j < cond_dim; ++j) r[h1 + pooled.size() + j] = (*conditioning)[j];
    }
    Matrix out = mlp_forward(p.fit_net, fit_in, cache ? &fit_cache : nullptr);
    if (cache) {
        cache->self_cache = std::move(self_cache);
        cache->int_cache = std::move(int_cache);
        cache->fit_cache = std::move(fit_cache);
        cache->pooled = pooled;
        cache->conditioning =
            conditioning ? *conditioning : std::vector<double>{};
        cache->n_elements = n;
    }
    return out;
}

struct EquivariantGrads {
    MlpGrads self_grads;
    MlpGrads int_grads;
    MlpGrads fit_grads;

    static EquivariantGrads zeros_like(const EquivariantOperatorParams& p) {
        return {MlpGrads::zeros_like(p.self_net), MlpGrads::zeros_like(p.int_net),
                MlpGrads::zeros_like(p.fit_net)};
    }

    void accumulate(const EquivariantGrads& o) {
        self_grads.accumulate(o.self_grads);
        int_grads.accumulate(o.int_grads);
        fit_grads.accumulate(o.fit_grads);
    }

    void scale(double s) {
        self_grads.scale(s);
        int_grads.scale(s);
        fit_grads.scale(s);
    }

    std::vector<double> flatten() const {
        std::vector<double> flat = self_grads.flatten();
        const auto i = int_grads.flatten();
        const auto f = fit_grads.flatten();
        flat.insert(flat.end(), i.begin(), i.end());
        flat.insert(flat.end(), f.begin(), f.end());
        return flat;
    }
};

/// Backward through fit, the concatenation split, the mean pool (each
/// element's int branch receives 1/N of the pooled gradient) and both
/// embedding networks. Returns per-element input gradients; the
/// conditioning gradient, when requested, is the sum over elements.
inline Matrix equivariant_backward(const EquivariantOperatorParams& p,
                                   const EquivariantCache& cache, const Matrix& output_grads,
                                   EquivariantGrads& grads,
                                   std::vector<double>* conditioning_grad = nullptr) {
    const std::size_t n = cache.n_elements;
    if (output_grads.rows() != n || output_grads.cols() != p.fit_net.output_dim())
        throw ShapeMismatch("equivariant_backward: output_grads shape mismatch");
    const std::size_t h1 = p.self_net.output_dim();
    const std::size_t h2 = p.int_net.output_dim();
    const std::size_t cond_dim = cache.conditioning.size();

    const Matrix fit_in_grad = mlp_backward(p.fit_net, cache.fit_cache, output_grads,
                                            grads.fit_grads);

    Matrix self_grad_out(n, h1);
    std::vector<double> pooled_grad(h2, 0.0);
    if (conditioning_grad) conditioning_grad->assign(cond_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* r = fit_in_grad.row_ptr(i);
        for (std::size_t j = 0; j < h1; ++j) self_grad_out(i, j) = r[j];
        for (std::size_t j = 0; j < h2; ++j) pooled_grad[j] += r[h1 + j];
        if (conditioning_grad)
            for (std::size_t j = 0; j < cond_dim; ++j)
                (*conditioning_grad)[j] += r[h1 + h2 + j];
    }

    Matrix int_grad_out(n, h2);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < h2; ++j) int_grad_out(i, j) = pooled_grad[j] * inv_n;

    Matrix element_grads = mlp_backward(p.self_net, cache.self_cache, self_grad_out,
                                        grads.self_grads);
    element_grads += mlp_backward(p.int_net, cache.int_cache, int_grad_out, grads.int_grads);
    return element_grads;
}

}  // namespace eqbayes
