#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nntuck {

/// Seeded generator with explicit draw algorithms so that results are
/// identical across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on (0, 1]: zero is excluded so draws can scale to strictly
    /// positive factor entries.
    double uniform01() {
        const std::uint64_t bits = engine_() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    /// Uniform on (lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Poisson draw by inversion; rates above 30 are split into pieces so the
    /// running product stays away from underflow.
    std::uint64_t poisson(double rate) {
        if (rate <= 0.0) return 0;
        std::uint64_t total = 0;
        while (rate > 30.0) {
            total += poisson_inversion(30.0);
            rate -= 30.0;
        }
        return total + poisson_inversion(rate);
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::uint64_t poisson_inversion(double rate) {
        const double u = uniform01();
        double p = std::exp(-rate);
        double cumulative = p;
        std::uint64_t k = 0;
        while (u > cumulative) {
            ++k;
            p *= rate / static_cast<double>(k);
            cumulative += p;
            if (p == 0.0) break;
        }
        return k;
    }

    std::mt19937_64 engine_;
};

}  // namespace nntuck
