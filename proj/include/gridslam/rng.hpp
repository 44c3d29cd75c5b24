#ifndef GRIDSLAM_RNG_HPP
#define GRIDSLAM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gridslam {

/// Deterministic RNG with explicit draw algorithms. std:: distributions are
/// implementation-defined, which would break byte-identical reproducibility
/// across standard libraries; all randomness in the project flows through
/// this one (splitmix64-based) generator.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t nextU64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n).
    std::int64_t uniformInt(std::int64_t n) {
        return static_cast<std::int64_t>(nextU64() % static_cast<std::uint64_t>(n));
    }

    /// Uniform real in [0, 1).
    double uniformReal() {
        return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
    }

    /// Uniform real in [lo, hi).
    double uniformReal(double lo, double hi) { return lo + (hi - lo) * uniformReal(); }

    /// Standard normal via Box-Muller; the paired value is cached.
    double gaussian() {
        if (hasSpare_) {
            hasSpare_ = false;
            return spare_;
        }
        double u1 = uniformReal();
        while (u1 <= 0.0) u1 = uniformReal();
        const double u2 = uniformReal();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
        hasSpare_ = true;
        return mag * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t state_;
    bool hasSpare_ = false;
    double spare_ = 0.0;
};

/// Mix two seeds into an independent stream seed.
inline std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace gridslam

#endif  // GRIDSLAM_RNG_HPP
