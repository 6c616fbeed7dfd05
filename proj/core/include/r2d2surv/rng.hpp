#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <random>

namespace r2d2surv {

// SplitMix64 finalizer, used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a child seed from a parent seed and a path of indices.
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix_seed(parent);
    for (auto k : path) s = mix_seed(s ^ mix_seed(k + 0x632be59bd9b4e019ULL));
    return s;
}

// Random stream used by every sampler. One instance per chain; not thread safe.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    engine_type& engine() noexcept { return engine_; }

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_(engine_); }
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Exp(1)
    double exponential() noexcept { return -std::log(uniform()); }

    // Gamma with shape-rate parameterization.
    double gamma(double shape, double rate) {
        std::gamma_distribution<double> g(shape, 1.0);
        return g(engine_) / rate;
    }

    // Inverse gamma: 1 / Gamma(shape, rate=scale).
    double inv_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

    Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, {stream})); }

private:
    engine_type engine_;
    std::uint64_t seed_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace r2d2surv
