#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rrde {

/// Seeded generator with explicitly specified transforms, so streams are identical on
/// every standard library (std:: distributions are implementation-defined).
///   engine:   mt19937_64
///   uniform:  top 53 bits / 2^53, in [0, 1)
///   normal:   Box-Muller, cosine branch only (one engine draw pair per variate)
///   exponential: -log(1 - U) / rate
class Rng {
public:
    static constexpr const char* algorithm = "mt19937_64+bm53";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal()
    {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace rrde
