#ifndef WGQED_NOISE_HPP
#define WGQED_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace wgqed {

// Deterministic noise source. Gaussian and Poisson variates are generated by
// explicit algorithms (Box-Muller, Knuth) on top of mt19937_64 so the streams
// are identical across platforms and standard-library versions.
class NoiseSource {
public:
    explicit NoiseSource(std::uint64_t seed) : rng_(seed) {}

    double uniform() {
        // 53-bit mantissa uniform in (0, 1).
        return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double gaussian(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    // Knuth's product method; adequate for the modest means used here.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 700.0) {
            // Gaussian approximation keeps the product below underflow.
            const double draw = std::round(gaussian(mean, std::sqrt(mean)));
            return draw < 0.0 ? 0 : static_cast<std::uint64_t>(draw);
        }
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace wgqed

#endif
