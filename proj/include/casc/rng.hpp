#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace casc {

// xoshiro256** seeded via splitmix64. Self-contained so that streams are
// reproducible across platforms and standard-library versions; the std
// distributions leave their algorithms unspecified, which would break the
// byte-identical-output contracts.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01();

    // Uniform on the open interval (0, 1).
    double uniform01_open();

    // Standard normal via Box-Muller (one value per pair of uniforms).
    double normal();

    // exp(log(median) + sigma * z). sigma == 0 degenerates to the median.
    double lognormal_median(double median, double sigma);

    // Marsaglia-Tsang; valid for any alpha > 0.
    double gamma(double alpha);

    double beta(double a, double b);

    // Inversion, chunked so large lambda stays numerically sound.
    std::uint64_t poisson(double lambda);

    // Index drawn proportionally to weights (need not be normalized).
    std::size_t categorical(std::span<const double> weights);

private:
    std::uint64_t state_[4];
};

}  // namespace casc
