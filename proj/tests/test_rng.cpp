#include <catch2/catch_amalgamated.hpp>

#include "pqsi/rng.hpp"

using pqsi::RngStream;

TEST_CASE("streams with identical keys produce identical draws") {
    RngStream a = RngStream::from_keys({7, 3, 11});
    RngStream b = RngStream::from_keys({7, 3, 11});
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("key order and key values change the stream") {
    RngStream a = RngStream::from_keys({7, 3, 11});
    RngStream b = RngStream::from_keys({7, 11, 3});
    RngStream c = RngStream::from_keys({7, 3, 12});
    REQUIRE(a.next_u64() != b.next_u64());
    REQUIRE(a.next_u64() != c.next_u64());
}

TEST_CASE("uniform doubles lie in [0,1) with sane mean") {
    RngStream rng(123);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.next_double();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    REQUIRE(std::abs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal draws match first two moments") {
    RngStream rng(99);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.next_normal();
        sum += x;
        sum_sq += x * x;
    }
    REQUIRE(std::abs(sum / n) < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(sum_sq / n - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("next_below stays in range and is roughly uniform") {
    RngStream rng(5);
    std::vector<long> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto x = rng.next_below(7);
        REQUIRE(x < 7);
        ++counts[x];
    }
    for (long c : counts) REQUIRE(std::abs(c - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
    REQUIRE_THROWS_AS(rng.next_below(0), std::invalid_argument);
}
