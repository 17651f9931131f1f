#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ncmet {

// Deterministic random source.  All distributions are derived from the raw
// mt19937_64 stream by hand so that identical seeds give identical values on
// every platform (std:: distributions are implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    // uniform in [0,1)
    double uniform() {
        return static_cast<double>(bits() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is negligible for the n used here
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    bool coin() { return (bits() & 1u) != 0; }

    // standard normal via Box-Muller
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64; used to derive independent stream positions from (seed, index)
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace ncmet
