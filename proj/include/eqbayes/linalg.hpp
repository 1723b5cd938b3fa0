#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "eqbayes/errors.hpp"
#include "eqbayes/matrix.hpp"
#include "eqbayes/rng.hpp"

namespace eqbayes {

struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;  // absolute value added to the diagonal, 0 if none
};

namespace detail {

// Plain lower Cholesky; returns false on a non-positive pivot.
inline bool try_cholesky(const Matrix& a, Matrix& lower) {
    const std::size_t n = a.rows();
    lower = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double ljj = std::sqrt(d);
        lower(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            const double* li = lower.row_ptr(i);
            const double* lj = lower.row_ptr(j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            lower(i, j) = s / ljj;
        }
    }
    return true;
}

inline void require_symmetric(const Matrix& a, const char* who) {
    if (a.rows() != a.cols())
        throw ShapeMismatch(std::string(who) + ": matrix not square");
    const double scale = std::max(a.max_abs(), 1e-300);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-10 * scale)
                throw ShapeMismatch(std::string(who) + ": matrix not symmetric");
}

}  // namespace detail

/// Cholesky with the escalating-jitter policy: on failure, add
/// lambda * mean(diag) * I with lambda stepping 1e-10 .. 1e-2 by factors of
/// 10, then give up. The applied jitter is reported in the result.
inline CholeskyFactor cholesky_with_jitter(const Matrix& a) {
    detail::require_symmetric(a, "cholesky");
    const std::size_t n = a.rows();
    CholeskyFactor out;
    if (detail::try_cholesky(a, out.lower)) return out;

    double diag_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_mean += a(i, i);
    diag_mean = std::abs(diag_mean / static_cast<double>(n));
    if (diag_mean == 0.0) diag_mean = 1.0;

    for (double lambda = 1e-10; lambda <= 1e-2 * (1.0 + 1e-12); lambda *= 10.0) {
        Matrix jittered = a;
        const double jit = lambda * diag_mean;
        for (std::size_t i = 0; i < n; ++i) jittered(i, i) += jit;
        if (detail::try_cholesky(jittered, out.lower)) {
            out.jitter = jit;
            return out;
        }
    }
    throw NotPositiveDefinite("cholesky: not positive definite after jitter escalation");
}

inline Matrix cholesky(const Matrix& a) { return cholesky_with_jitter(a).lower; }

/// Solve L * x = b for lower-triangular L (columns of b independently).
inline Matrix forward_substitute(const Matrix& lower, const Matrix& b) {
    const std::size_t n = lower.rows();
    if (b.rows() != n) throw ShapeMismatch("forward_substitute: dimension mismatch");
    Matrix x = b;
    for (std::size_t i = 0; i < n; ++i) {
        const double* li = lower.row_ptr(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = li[k];
            if (lik == 0.0) continue;
            const double* xk = x.row_ptr(k);
            double* xi = x.row_ptr(i);
            for (std::size_t j = 0; j < b.cols(); ++j) xi[j] -= lik * xk[j];
        }
        const double inv = 1.0 / li[i];
        double* xi = x.row_ptr(i);
        for (std::size_t j = 0; j < b.cols(); ++j) xi[j] *= inv;
    }
    return x;
}

/// Solve L^T * x = b for lower-triangular L.
inline Matrix back_substitute_transposed(const Matrix& lower, const Matrix& b) {
    const std::size_t n = lower.rows();
    if (b.rows() != n) throw ShapeMismatch("back_substitute: dimension mismatch");
    Matrix x = b;
    for (std::size_t ii = n; ii-- > 0;) {
        const double inv = 1.0 / lower(ii, ii);
        double* xi = x.row_ptr(ii);
        for (std::size_t j = 0; j < b.cols(); ++j) xi[j] *= inv;
        for (std::size_t k = 0; k < ii; ++k) {
            const double lik = lower(ii, k);
            if (lik == 0.0) continue;
            double* xk = x.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) xk[j] -= lik * xi[j];
        }
    }
    return x;
}

inline Matrix solve_cholesky(const CholeskyFactor& f, const Matrix& b) {
    return back_substitute_transposed(f.lower, forward_substitute(f.lower, b));
}

/// Solve a * x = b for symmetric positive definite a (jitter policy applies).
inline Matrix solve_psd(const Matrix& a, const Matrix& b) {
    return solve_cholesky(cholesky_with_jitter(a), b);
}

inline std::vector<double> solve_psd(const Matrix& a, const std::vector<double>& b) {
    return solve_psd(a, Matrix::column(b)).col(0);
}

inline double log_det(const CholeskyFactor& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.lower.rows(); ++i) s += std::log(f.lower(i, i));
    return 2.0 * s;
}

inline double log_det_psd(const Matrix& a) { return log_det(cholesky_with_jitter(a)); }

/// Draw from N(mean, cov) with a full covariance: mean + L*z.
inline std::vector<double> sample_gaussian_full(Rng& rng, const std::vector<double>& mean,
                                                const Matrix& cov) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw ShapeMismatch("sample_gaussian_full: covariance shape mismatch");
    const Matrix lower = cholesky(cov);
    const std::vector<double> z = rng.normal_vector(mean.size());
    std::vector<double> out = mean;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) s += lower(i, k) * z[k];
        out[i] += s;
    }
    return out;
}

}  // namespace eqbayes
