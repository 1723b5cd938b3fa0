#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eqbayes/errors.hpp"
#include "eqbayes/matrix.hpp"

namespace eqbayes {

/// Deterministic 64-bit generator, frozen to xoshiro256++ seeded through
/// splitmix64. Identical seed gives an identical stream on every platform.
/// Gaussian draws use the pair-cached Box-Muller transform on the uniform
/// stream; the cosine branch is returned first, the sine branch on the next
/// call.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
        have_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in (0, 1]; never 0 so log() in Box-Muller stays finite.
    double uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_cached_normal_) {
            have_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * pi() * u2;
        cached_normal_ = r * std::sin(theta);
        have_cached_normal_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> out(n);
        for (double& v : out) v = normal();
        return out;
    }

    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        // Rejection sampling on the top bits avoids modulo bias.
        const std::uint64_t bound = n;
        const std::uint64_t threshold = (~bound + 1) % bound;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::size_t>(r % bound);
        }
    }

    /// Deterministic sub-stream derivation: mixes the parent seed with the
    /// stream id so experiment components get independent generators.
    Rng derive(std::uint64_t stream_id) const {
        std::uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
        const std::uint64_t mixed = splitmix64(x);
        return Rng(mixed);
    }

    static constexpr double pi() { return 3.14159265358979323846; }

  private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t state_[4];
    bool have_cached_normal_;
    double cached_normal_;
};

/// Draw from N(mean, diag(var)). Zero variance returns the mean component
/// exactly (a standard normal is still consumed per component).
inline std::vector<double> sample_gaussian_diag(Rng& rng, const std::vector<double>& mean,
                                                const std::vector<double>& var_diag) {
    if (mean.size() != var_diag.size())
        throw ShapeMismatch("sample_gaussian_diag: mean/variance length mismatch");
    std::vector<double> out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        if (var_diag[i] < 0.0)
            throw NotPositiveDefinite("sample_gaussian_diag: negative variance");
        out[i] = mean[i] + std::sqrt(var_diag[i]) * rng.normal();
    }
    return out;
}

}  // namespace eqbayes
