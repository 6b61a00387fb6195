#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace evgrid {

// splitmix64: seed expansion and stream derivation.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a root seed and a label/index pair.
uint64_t derive_seed(uint64_t root, std::string_view label, uint64_t index = 0);

// xoshiro256++ generator. Deterministic across platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();
    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    // Standard normal via inverse-CDF (deterministic, one draw per call).
    double normal();
    double normal(double mean, double std);
    // Truncated normal on [low, high]; zero std returns the clamped mean.
    double truncated_normal(double mean, double std, double low, double high);
    // Integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi);

  private:
    uint64_t s_[4];
};

// Standard normal CDF and its inverse (Wichura AS241); exposed for test oracles.
double normal_cdf(double x);
double normal_icdf(double p);

// Mean of a normal(mean, std) truncated to [low, high]; closed form.
double truncated_normal_mean(double mean, double std, double low, double high);

}  // namespace evgrid
