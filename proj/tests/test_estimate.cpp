#include <catch2/catch_amalgamated.hpp>

#include "pqsi/estimate.hpp"
#include "test_helpers.hpp"

using namespace pqsi;

TEST_CASE("collision estimator on small outcome lists") {
    const std::vector<int> both_zero{0, 0};
    REQUIRE(collision_estimator(both_zero, 2).g_tilde == Catch::Approx(0.5).margin(1e-15));
    const std::vector<int> distinct{0, 1};
    REQUIRE(collision_estimator(distinct, 2).g_tilde == Catch::Approx(0.0).margin(1e-15));
    const std::vector<int> triple{0, 0, 1};
    REQUIRE(collision_estimator(triple, 2).g_tilde == Catch::Approx(2.0 / 9.0).margin(1e-15));
}

TEST_CASE("collision estimator rejects degenerate input") {
    const std::vector<int> single{0};
    REQUIRE_THROWS_AS(collision_estimator(single, 2), std::invalid_argument);
    const std::vector<int> out_of_range{0, 5};
    REQUIRE_THROWS_AS(collision_estimator(out_of_range, 2), std::invalid_argument);
    const std::vector<int> ok{0, 1};
    REQUIRE_THROWS_AS(collision_expectation(OutcomeDistribution({0.5, 0.5}), 1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(collision_variance_bound(OutcomeDistribution({0.5, 0.5}), 1),
                      std::invalid_argument);
}

TEST_CASE("collision statistic stays inside its stated range") {
    RngStream rng(211);
    for (int rep = 0; rep < 200; ++rep) {
        const int d = 2 + static_cast<int>(rng.next_below(4));
        const int m = 2 + static_cast<int>(rng.next_below(5));
        std::vector<int> outcomes(m);
        for (int& x : outcomes) x = static_cast<int>(rng.next_below(d));
        const double g = collision_estimator(outcomes, d).g_tilde;
        REQUIRE(g >= -1.0 / m - 1e-15);
        REQUIRE(g <= (m - 1.0) / m + 1e-15);
    }
}

TEST_CASE("hand-checked expectations from brute force") {
    // Uniform d=2, m=2: the four equiprobable pairs give g values
    // {0.5, 0, 0, 0.5}, mean 0.25.
    REQUIRE(collision_expectation(OutcomeDistribution({0.5, 0.5}), 2) ==
            Catch::Approx(0.25).margin(1e-15));
    // Point mass: every outcome collides.
    for (int m : {2, 3, 5})
        REQUIRE(collision_expectation(OutcomeDistribution({1.0, 0.0}), m) ==
                Catch::Approx((m - 1.0) / m).margin(1e-15));
    // (0.8, 0.2), m=3 against the exhaustive oracle over all 8 triples.
    const auto [mean, var] = test_oracle::collision_moments_exhaustive({0.8, 0.2}, 3);
    REQUIRE(collision_expectation(OutcomeDistribution({0.8, 0.2}), 3) ==
            Catch::Approx(mean).margin(1e-14));
    REQUIRE(mean == Catch::Approx(2.0 / 3.0 * 0.68).margin(1e-14));
    REQUIRE(var <= collision_variance_bound(OutcomeDistribution({0.8, 0.2}), 3));
}

TEST_CASE("unbiasedness and variance domination over a seeded distribution set") {
    RngStream rng(223);
    for (int d : {2, 3, 4}) {
        for (int m : {2, 3, 4}) {
            if (std::pow(d, m) > 4096) continue;
            for (int rep = 0; rep < 4; ++rep) {
                std::vector<double> probs(d);
                double sum = 0.0;
                for (double& p : probs) {
                    p = rng.next_double() + 1e-3;
                    sum += p;
                }
                for (double& p : probs) p /= sum;
                const OutcomeDistribution dist(probs);
                const auto [mean, var] =
                    test_oracle::collision_moments_exhaustive(dist.probs(), m);
                REQUIRE(collision_expectation(dist, m) == Catch::Approx(mean).margin(1e-12));
                REQUIRE(var <= collision_variance_bound(dist, m) + 1e-12);
            }
        }
    }
}

TEST_CASE("variance bound point cases") {
    // Point mass, m=2: bound 2*(1/2)/4 + (4/2)*1 = 2.25, true variance 0.
    const OutcomeDistribution point({1.0, 0.0});
    REQUIRE(collision_variance_bound(point, 2) == Catch::Approx(2.25).margin(1e-14));
    const auto [pm, pv] = test_oracle::collision_moments_exhaustive({1.0, 0.0}, 2);
    REQUIRE(pv == Catch::Approx(0.0).margin(1e-15));

    // Uniform d=2, m=2: bound 0.625, true variance 0.0625.
    const OutcomeDistribution coin({0.5, 0.5});
    REQUIRE(collision_variance_bound(coin, 2) == Catch::Approx(0.625).margin(1e-14));
    const auto [cm, cv] = test_oracle::collision_moments_exhaustive({0.5, 0.5}, 2);
    REQUIRE(cv == Catch::Approx(0.0625).margin(1e-14));
}

TEST_CASE("haar averaged expectation closed form") {
    REQUIRE(haar_averaged_expectation(1.0, 2, 2) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    REQUIRE(haar_averaged_expectation(0.25, 2, 4) == Catch::Approx(0.125).margin(1e-15));
    REQUIRE(haar_averaged_expectation(0.5, 1000, 2) ==
            Catch::Approx(999.0 * 1.5 / (1000.0 * 3.0)).margin(1e-15));
    REQUIRE_THROWS_AS(haar_averaged_expectation(0.1, 2, 2), std::domain_error);
}

TEST_CASE("haar average of the conditional expectation matches the closed form") {
    for (int d : {2, 4}) {
        for (double z : {0.5, 1.0}) {
            RngStream rng = RngStream::from_keys({227, static_cast<std::uint64_t>(d),
                                                  static_cast<std::uint64_t>(z * 100)});
            const int m = 4;
            const double alpha = alpha_from_purity(z, d);
            const DensityMatrix rho = depolarized_state(sample_haar_unitary(d, rng), alpha, d);
            const int n = 10000;
            double sum = 0.0, sum_sq = 0.0;
            for (int i = 0; i < n; ++i) {
                const RotatedBasis basis{sample_haar_unitary(d, rng)};
                const double e = collision_expectation(rotated_basis_distribution(rho, basis), m);
                sum += e;
                sum_sq += e * e;
            }
            const double mean = sum / n;
            const double se = std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);
            const double target = haar_averaged_expectation(z, m, d);
            REQUIRE(std::abs(mean - target) <= 4.0 * se + 1e-12);
        }
    }
}
