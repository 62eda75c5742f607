// estimate.hpp
// Collision purity statistic for randomized-basis measurements and the
// closed-form moment expressions used as oracles against it.

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "pqsi/measure.hpp"

namespace pqsi {

// g~ = (1/m^2) sum_i count_i^2 - 1/m from m outcomes in one basis.
struct CollisionStat {
    double g_tilde = 0.0;
    int m = 0;
    int basis_index = 0;
};

// Per-phase mean statistic w for one state. In IM mode w averages collision
// statistics over bases; in CM mode it averages SWAP-test accept bits.
struct PhaseStat {
    double w = 0.0;
    int state_id = 0;
    int phase = 0;
    int n_bases = 0;
};

// Counts outcomes into d buckets; O(m + d) and algebraically identical to
// the pairwise-collision form.
inline CollisionStat collision_estimator(std::span<const int> outcomes, int d,
                                         int basis_index = 0) {
    const int m = static_cast<int>(outcomes.size());
    if (m < 2)
        throw std::invalid_argument("collision_estimator: need m >= 2 outcomes");
    if (d < 2) throw std::invalid_argument("collision_estimator: d must be >= 2");
    std::vector<long> counts(d, 0);
    for (int x : outcomes) {
        if (x < 0 || x >= d)
            throw std::invalid_argument("collision_estimator: outcome out of range");
        ++counts[x];
    }
    double sum_sq = 0.0;
    for (long c : counts) sum_sq += static_cast<double>(c) * static_cast<double>(c);
    const double mm = static_cast<double>(m);
    return CollisionStat{sum_sq / (mm * mm) - 1.0 / mm, m, basis_index};
}

// E[g~ | basis] = ((m-1)/m) sum_i p_i^2.
inline double collision_expectation(const OutcomeDistribution& dist, int m) {
    if (m < 2) throw std::invalid_argument("collision_expectation: m must be >= 2");
    return (m - 1.0) / m * dist.sum_squares();
}

// Var[g~ | basis] <= 2 E[g~]/m^2 + (4/m) sum_i p_i^3.
inline double collision_variance_bound(const OutcomeDistribution& dist, int m) {
    if (m < 2) throw std::invalid_argument("collision_variance_bound: m must be >= 2");
    return 2.0 * collision_expectation(dist, m) / (static_cast<double>(m) * m) +
           4.0 / m * dist.sum_cubes();
}

// Haar average of the conditional expectation:
// E_U E[g~ | U] = (m-1)(1 + z) / (m (d+1)) for a state of purity z.
inline double haar_averaged_expectation(double z, int m, int d) {
    if (m < 2) throw std::invalid_argument("haar_averaged_expectation: m must be >= 2");
    if (d < 2) throw std::invalid_argument("haar_averaged_expectation: d must be >= 2");
    if (z < 1.0 / d - 1e-12 || z > 1.0 + 1e-12)
        throw std::domain_error("haar_averaged_expectation: purity must lie in [1/d, 1]");
    return (m - 1.0) * (1.0 + z) / (m * (d + 1.0));
}

}  // namespace pqsi
