#include "evgrid/rng.hpp"

#include <cmath>

namespace evgrid {

uint64_t derive_seed(uint64_t root, std::string_view label, uint64_t index) {
    // FNV-1a over the label, then splitmix both halves together.
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    uint64_t state = root ^ h;
    splitmix64(state);
    state ^= index * 0x9e3779b97f4a7c15ULL;
    return splitmix64(state);
}

Rng::Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

static inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    // Inverse-CDF keeps the draw count per sample fixed (unlike rejection),
    // which the determinism contracts rely on.
    double u = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    return normal_icdf(u);
}

double Rng::normal(double mean, double std) { return mean + std * normal(); }

double Rng::truncated_normal(double mean, double std, double low, double high) {
    if (!(low < high)) throw std::invalid_argument("truncated_normal: low must be < high");
    if (std < 0.0) throw std::invalid_argument("truncated_normal: negative std");
    if (std == 0.0) {
        double v = mean;
        if (v < low) v = low;
        if (v > high) v = high;
        return v;
    }
    const double a = normal_cdf((low - mean) / std);
    const double b = normal_cdf((high - mean) / std);
    double u = a + (b - a) * uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    if (u >= 1.0) u = 1.0 - 0x1.0p-53;
    double x = mean + std * normal_icdf(u);
    if (x < low) x = low;
    if (x > high) x = high;
    return x;
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Wichura's algorithm AS241 (PPND16): inverse of the standard normal CDF,
// accurate to ~1e-16 over (0, 1).
double normal_icdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_icdf: p outside (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double truncated_normal_mean(double mean, double std, double low, double high) {
    if (std == 0.0) return std::min(std::max(mean, low), high);
    const double alpha = (low - mean) / std;
    const double beta = (high - mean) / std;
    const double phi_a = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * M_PI);
    const double phi_b = std::exp(-0.5 * beta * beta) / std::sqrt(2.0 * M_PI);
    const double z = normal_cdf(beta) - normal_cdf(alpha);
    return mean + std * (phi_a - phi_b) / z;
}

}  // namespace evgrid
