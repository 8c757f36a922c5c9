#include <doctest.h>

#include "colopred/metrics.hpp"
#include "colopred/rng.hpp"
#include "test_util.hpp"

using namespace colopred;
using metrics::Label;

TEST_CASE("degradation matches direct arithmetic") {
    CHECK(metrics::degradation(100.0, 207.12) == doctest::Approx(107.12).epsilon(1e-12));

    // Two algebraically different routes agree on the large-ratio case.
    const double via_def = metrics::degradation(50.0, 478.705);
    const double via_ratio = (478.705 / 50.0 - 1.0) * 100.0;
    CHECK(via_def == doctest::Approx(via_ratio).epsilon(1e-12));
    CHECK(via_def == doctest::Approx(857.41).epsilon(1e-12));
}

TEST_CASE("degradation identity and doubling") {
    Rng rng(42);
    for (int i = 0; i < 100; ++i) {
        const double t = rng.uniform(1e-3, 1e4);
        CHECK(metrics::degradation(t, t) == 0.0);
        CHECK(metrics::degradation(t, 2.0 * t) == doctest::Approx(100.0).epsilon(1e-12));
    }
}

TEST_CASE("degradation rejects non-positive times") {
    CHECK_ERRC(metrics::degradation(0.0, 10.0), Errc::non_positive_time);
    CHECK_ERRC(metrics::degradation(10.0, 0.0), Errc::non_positive_time);
    CHECK_ERRC(metrics::degradation(-1.0, 10.0), Errc::non_positive_time);
}

TEST_CASE("degradation is monotone in both arguments") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const double s = rng.uniform(0.1, 100.0);
        const double c = rng.uniform(0.1, 100.0);
        const double d = rng.uniform(1e-6, 10.0);
        CHECK(metrics::degradation(s, c + d) > metrics::degradation(s, c));
        CHECK(metrics::degradation(s + d, c) < metrics::degradation(s, c));
    }
}

TEST_CASE("labeling boundary is closed at the threshold") {
    CHECK(metrics::label(99.999) == Label::Low);
    CHECK(metrics::label(100.0) == Label::High);
    CHECK(metrics::label(918.26) == Label::High);
    CHECK(metrics::label(-50.0) == Label::Low);  // co-located faster stays Low
    CHECK(metrics::label(49.9, 50.0) == Label::Low);
    CHECK(metrics::label(50.0, 50.0) == Label::High);
    CHECK_ERRC(metrics::label(10.0, 0.0), Errc::bad_format);
}

TEST_CASE("label is scale-invariant in the underlying times") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double s = rng.uniform(0.1, 50.0);
        const double c = rng.uniform(0.1, 200.0);
        const double k = rng.uniform(1e-3, 1e3);
        CHECK(metrics::label(metrics::degradation(s, c)) ==
              metrics::label(metrics::degradation(k * s, k * c)));
    }
}

TEST_CASE("classify_degradation keeps the label consistent with the threshold") {
    auto r = metrics::classify_degradation(100.0, 207.12, 100.0);
    CHECK(r.label == Label::High);
    CHECK(r.threshold_percent == 100.0);
    auto r2 = metrics::classify_degradation(100.0, 150.0, 50.0);
    CHECK(r2.label == Label::High);  // boundary is closed
    auto r3 = metrics::classify_degradation(100.0, 150.0);
    CHECK(r3.label == Label::Low);
    CHECK(r3.pd_percent == doctest::Approx(50.0));
}
