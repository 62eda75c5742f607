#include <catch2/catch_amalgamated.hpp>

#include "pqsi/measure.hpp"
#include "test_helpers.hpp"

using namespace pqsi;

TEST_CASE("rotated basis distribution of the maximally mixed state is uniform") {
    RngStream rng(101);
    for (int d : {2, 4, 8}) {
        const DensityMatrix mixed(CMatrix::Identity(d, d) / d);
        const RotatedBasis basis{sample_haar_unitary(d, rng)};
        const OutcomeDistribution dist = rotated_basis_distribution(mixed, basis);
        for (double p : dist.probs()) REQUIRE(p == Catch::Approx(1.0 / d).margin(1e-12));
    }
}

TEST_CASE("rotated basis distribution point cases") {
    CMatrix e00 = CMatrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    const DensityMatrix pure(e00);

    const OutcomeDistribution ident =
        rotated_basis_distribution(pure, RotatedBasis{UnitaryMatrix::identity(2)});
    REQUIRE(ident.probs()[0] == Catch::Approx(1.0).margin(1e-14));
    REQUIRE(ident.probs()[1] == Catch::Approx(0.0).margin(1e-14));

    CMatrix had(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    had << s, s, s, -s;
    const OutcomeDistribution split =
        rotated_basis_distribution(pure, RotatedBasis{UnitaryMatrix(had)});
    REQUIRE(split.probs()[0] == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(split.probs()[1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("outcome probabilities sum to 1 and purity bounds hold") {
    RngStream rng(103);
    for (int rep = 0; rep < 20; ++rep) {
        const int d = rep % 2 == 0 ? 4 : 8;
        const DensityMatrix rho = test_oracle::random_density_matrix(d, rng);
        const RotatedBasis basis{sample_haar_unitary(d, rng)};
        const OutcomeDistribution dist = rotated_basis_distribution(rho, basis);
        double sum = 0.0;
        for (double p : dist.probs()) sum += p;
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(dist.sum_squares() >= 1.0 / d - 1e-12);
        REQUIRE(dist.sum_squares() <= 1.0 + 1e-12);
    }
}

TEST_CASE("outcome distribution validation") {
    REQUIRE_THROWS_AS(OutcomeDistribution({0.5, 0.6}), std::invalid_argument);
    REQUIRE_THROWS_AS(OutcomeDistribution({1.2, -0.2}), std::invalid_argument);
    const OutcomeDistribution clamped({1.0 + 5e-13, -5e-13});
    REQUIRE(clamped.probs()[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(clamped.probs()[1] >= 0.0);
}

TEST_CASE("sampling a point mass always returns its outcome") {
    RngStream rng(107);
    const OutcomeDistribution point({1.0, 0.0});
    for (int x : sample_outcomes(point, 5, rng)) REQUIRE(x == 0);
}

TEST_CASE("zero-probability buckets are never sampled") {
    RngStream rng(108);
    const OutcomeDistribution dist({0.5, 0.0, 0.5});
    for (int x : sample_outcomes(dist, 20000, rng)) REQUIRE(x != 1);
}

TEST_CASE("dimension mismatches are rejected") {
    const DensityMatrix mixed(CMatrix::Identity(2, 2) * 0.5);
    REQUIRE_THROWS_AS(
        rotated_basis_distribution(mixed, RotatedBasis{UnitaryMatrix::identity(4)}),
        std::invalid_argument);
    REQUIRE_THROWS_AS(povm_accept_prob(mixed, TwoOutcomePovm::half_identity(4)),
                      std::invalid_argument);
}

TEST_CASE("fair coin frequencies match binomial error bars") {
    RngStream rng(109);
    const OutcomeDistribution coin({0.5, 0.5});
    const int n = 100000;
    const auto outcomes = sample_outcomes(coin, n, rng);
    long zeros = 0;
    for (int x : outcomes) zeros += x == 0;
    REQUIRE(std::abs(zeros / static_cast<double>(n) - 0.5) <= 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("uniform d=4 sampling passes a chi-square goodness of fit") {
    RngStream rng(113);
    const OutcomeDistribution uniform({0.25, 0.25, 0.25, 0.25});
    const int n = 40000;
    std::vector<long> counts(4, 0);
    for (int x : sample_outcomes(uniform, n, rng)) ++counts[x];
    const std::vector<double> expected(4, n / 4.0);
    REQUIRE(test_oracle::chi_square_statistic(counts, expected) <
            test_oracle::chi_square_critical_1pct(3));
}

TEST_CASE("born rule consistency for seeded state and basis pairs") {
    for (std::uint64_t seed : {201ULL, 202ULL, 203ULL}) {
        RngStream rng(seed);
        const int d = 4;
        const DensityMatrix rho = test_oracle::random_density_matrix(d, rng);
        const RotatedBasis basis{sample_haar_unitary(d, rng)};
        const OutcomeDistribution dist = rotated_basis_distribution(rho, basis);
        const int n = 40000;
        std::vector<long> counts(d, 0);
        for (int x : sample_outcomes(dist, n, rng)) ++counts[x];
        std::vector<double> expected;
        for (double p : dist.probs()) expected.push_back(p * n);
        REQUIRE(test_oracle::chi_square_statistic(counts, expected) <
                test_oracle::chi_square_critical_1pct(d - 1));
    }
}

TEST_CASE("swap test accept rate tracks (1+z)/2") {
    RngStream rng(127);
    const int n = 100000;
    for (double z : {0.5, 0.68, 0.9, 1.0}) {
        long accepts = 0;
        for (int i = 0; i < n; ++i) accepts += swap_test_sample(z, rng);
        const double target = 0.5 * (1.0 + z);
        const double se = std::sqrt(target * (1.0 - target) / n);
        REQUIRE(std::abs(accepts / static_cast<double>(n) - target) <= 3.0 * se + 1e-12);
    }
    REQUIRE_THROWS_AS(swap_test_sample(1.5, rng), std::domain_error);
    REQUIRE_THROWS_AS(swap_test_sample(-0.1, rng), std::domain_error);
}

TEST_CASE("swap test never rejects a pure state") {
    RngStream rng(131);
    for (int i = 0; i < 1000; ++i) REQUIRE(swap_test_sample(1.0, rng) == 1);
}

TEST_CASE("two-outcome povm validation and effect structure") {
    REQUIRE_THROWS_AS(TwoOutcomePovm(CMatrix::Identity(2, 2) * 1.5), std::invalid_argument);
    CMatrix negative = CMatrix::Identity(2, 2) * -0.2;
    REQUIRE_THROWS_AS(TwoOutcomePovm(negative), std::invalid_argument);

    const TwoOutcomePovm proj = TwoOutcomePovm::diagonal_projector(1, 2);
    REQUIRE(max_abs(proj.m0() + proj.m1() - CMatrix::Identity(2, 2)) == 0.0);
    REQUIRE(hermitian_eigenvalues(proj.m1()).minCoeff() >= -kPsdTol);
    REQUIRE(proj.light_trace() == Catch::Approx(1.0).margin(1e-14));

    // Trace tie at d/2: light effect resolves to M0.
    const TwoOutcomePovm tie = TwoOutcomePovm::diagonal_projector(2, 4);
    REQUIRE(tie.light_is_m0());
    REQUIRE(tie.light_trace() == Catch::Approx(2.0).margin(1e-14));

    const TwoOutcomePovm heavy = TwoOutcomePovm::diagonal_projector(3, 4);
    REQUIRE_FALSE(heavy.light_is_m0());
    REQUIRE(heavy.light_trace() == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("povm acceptance probabilities") {
    const DensityMatrix mixed(CMatrix::Identity(2, 2) * 0.5);
    CMatrix e00 = CMatrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    const DensityMatrix pure(e00);

    const TwoOutcomePovm half = TwoOutcomePovm::half_identity(2);
    REQUIRE(povm_accept_prob(mixed, half) == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(povm_accept_prob(pure, half) == Catch::Approx(0.5).margin(1e-12));

    const TwoOutcomePovm proj = TwoOutcomePovm::diagonal_projector(1, 2);
    REQUIRE(povm_accept_prob(pure, proj) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(povm_accept_prob(mixed, proj) == Catch::Approx(0.5).margin(1e-12));
}
