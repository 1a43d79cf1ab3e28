#include "casc/rng.hpp"

#include <cmath>

#include "casc/error.hpp"

namespace casc {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform01_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double Rng::lognormal_median(double median, double sigma) {
    if (sigma == 0.0) return median;
    return median * std::exp(sigma * normal());
}

double Rng::gamma(double alpha) {
    if (alpha <= 0.0) throw ConfigError("gamma: alpha must be positive");
    if (alpha < 1.0) {
        // Boost: Gamma(a) = Gamma(a+1) * U^(1/a).
        const double g = gamma(alpha + 1.0);
        const double u = uniform01_open();
        return g * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01_open();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

std::uint64_t Rng::poisson(double lambda) {
    if (lambda < 0.0) throw ConfigError("poisson: lambda must be non-negative");
    if (lambda == 0.0) return 0;
    // Split so exp(-chunk) stays far from underflow.
    std::uint64_t total = 0;
    double remaining = lambda;
    while (remaining > 0.0) {
        const double chunk = remaining > 30.0 ? 30.0 : remaining;
        remaining -= chunk;
        const double limit = std::exp(-chunk);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01_open();
        } while (p > limit);
        total += k - 1;
    }
    return total;
}

std::size_t Rng::categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw ConfigError("categorical: weights must sum to a positive value");
    double target = uniform01() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (target < cum) return i;
    }
    return weights.size() - 1;
}

}  // namespace casc
