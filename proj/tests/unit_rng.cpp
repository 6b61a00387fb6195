#include <cmath>

#include "doctest.h"
#include "evgrid/rng.hpp"

using namespace evgrid;

TEST_CASE("same seed reproduces the stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive_seed separates labels and indices") {
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
    CHECK(derive_seed(1, "a", 7) == derive_seed(1, "a", 7));
}

TEST_CASE("normal_icdf inverts normal_cdf") {
    for (double x : {-3.0, -1.0, -0.1, 0.0, 0.4, 2.2}) {
        CHECK(normal_icdf(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
    }
}

TEST_CASE("truncated normal stays in bounds") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.truncated_normal(0.5, 1.0, 0.2, 0.9);
        CHECK(v >= 0.2);
        CHECK(v <= 0.9);
    }
}

TEST_CASE("zero variance returns the clamped mean") {
    Rng rng(9);
    CHECK(rng.truncated_normal(0.5, 0.0, 0.2, 0.9) == 0.5);
    CHECK(rng.truncated_normal(5.0, 0.0, 0.2, 0.9) == 0.9);
}

TEST_CASE("monte carlo mean matches the closed-form truncated-normal mean") {
    // 1e5 samples against the analytic moment, within three standard errors.
    const double mean = 25.0, std = 5.0, lo = 10.0, hi = 45.0;
    Rng rng(1234);
    const int n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.truncated_normal(mean, std, lo, hi);
        acc += v;
        acc2 += v * v;
    }
    const double sample_mean = acc / n;
    const double sample_var = acc2 / n - sample_mean * sample_mean;
    const double se = std::sqrt(sample_var / n);
    const double expect = truncated_normal_mean(mean, std, lo, hi);
    CHECK(std::abs(sample_mean - expect) <= 3.0 * se);
}
