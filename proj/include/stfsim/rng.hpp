#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace stfsim {

// SplitMix64 step; used only to expand seeds into engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with SplitMix64 seeding. Cheap to construct per trial, so
// Monte Carlo trials get their own stream from (master, stream, index)
// and can run in any order or thread with identical results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static Rng for_trial(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
        std::uint64_t sm = master;
        std::uint64_t a = splitmix64(sm);
        sm = a ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        std::uint64_t b = splitmix64(sm);
        sm = b ^ (0xd1b54a32d192ed03ULL * (index + 1));
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // {0, ..., n-1}; modulo bias is negligible for the small n used here
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    // N(0, 1), Box-Muller with the second value cached
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
        const double th = 2.0 * pi() * uniform();
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    // CN(0, 1): unit total variance, 1/2 per quadrature
    std::complex<double> cgauss() {
        const double r = std::sqrt(-std::log(1.0 - uniform()));
        const double th = 2.0 * pi() * uniform();
        return {r * std::cos(th), r * std::sin(th)};
    }

    static constexpr double pi() { return 3.14159265358979323846; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace stfsim
