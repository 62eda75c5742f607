// lowerbound.hpp
// Fixed two-outcome POVM experiments: shared-rotation instances, the affine
// Bernoulli reduction and its coefficient, the concentration experiment, and
// classical bandit trials driven by the shared successive-rejects engine.

#pragma once

#include <cmath>
#include <vector>

#include "pqsi/identify.hpp"

namespace pqsi {

// Coefficients |c| below this are treated as an uninformative POVM: the
// affine map carries no purity signal beyond floating-point noise.
inline constexpr double kUninformativeTol = 1e-12;

// K depolarized states built from one shared Haar rotation; the rotation is
// the instance's hidden randomness.
struct PrqsiInstance {
    std::vector<double> zs;
    std::vector<double> alphas;
    UnitaryMatrix u;
    int dim = 0;
    std::vector<DensityMatrix> states;

    int k_arms() const { return static_cast<int>(states.size()); }
    int best_index() const {
        return static_cast<int>(std::max_element(zs.begin(), zs.end()) - zs.begin());
    }
};

inline PrqsiInstance build_prqsi_states(const std::vector<double>& zs, int d,
                                        const UnitaryMatrix& u) {
    if (zs.size() < 2) throw std::invalid_argument("build_prqsi_states: need at least 2 purities");
    if (u.dim() != d) throw std::invalid_argument("build_prqsi_states: dimension mismatch");
    std::vector<double> sorted = zs;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (sorted[0] - sorted[1] < kTieMargin)
        throw std::invalid_argument("build_prqsi_states: top-two purity margin below 1e-9 (tie)");

    PrqsiInstance inst{zs, {}, u, d, {}};
    inst.alphas.reserve(zs.size());
    inst.states.reserve(zs.size());
    for (double z : zs) {
        const double alpha = alpha_from_purity(z, d);
        inst.alphas.push_back(alpha);
        inst.states.push_back(depolarized_state(u, alpha, d));
    }
    return inst;
}

// c(M, U) = <0|U' M U|0> - Tr(M)/d for the light effect M, so that the
// acceptance probability of each instance state is c(M,U) alpha_k + Tr(M)/d.
inline double c_coefficient(const TwoOutcomePovm& povm, const UnitaryMatrix& u) {
    if (povm.dim() != u.dim()) throw std::invalid_argument("c_coefficient: dimension mismatch");
    const CMatrix m = povm.light_effect();
    const CVector col0 = u.mat().col(0);
    const Complex val = col0.dot(m * col0);
    return val.real() - povm.light_trace() / u.dim();
}

// Max over k of |Tr(M tau_k) - (c(M,U) alpha_k + Tr(M)/d)|; an algebraic
// identity, so the residual should sit at float-noise level.
inline double affine_identity_check(const PrqsiInstance& inst, const TwoOutcomePovm& povm) {
    const double c = c_coefficient(povm, inst.u);
    const double offset = povm.light_trace() / inst.dim;
    double max_residual = 0.0;
    for (int k = 0; k < inst.k_arms(); ++k) {
        const double p = povm_accept_prob(inst.states[k], povm);
        max_residual = std::max(max_residual, std::abs(p - (c * inst.alphas[k] + offset)));
    }
    return max_residual;
}

struct ConcentrationReport {
    int trials = 0;
    double in_window_fraction = 0.0;
    double window_halfwidth = 0.0;     // 2 alpha sqrt(Tr M) / d
    double empirical_variance = 0.0;
    double variance_bound = 0.0;       // alpha^2 Tr M / (d (d+1))
    double variance_std_error = 0.0;   // SE of the sample variance (4th-moment route)
    double mean_accept = 0.0;
};

// Draws Haar rotations, measures how often the acceptance probability of the
// depolarized state lands inside the concentration window, and compares the
// empirical variance with its closed-form bound.
inline ConcentrationReport concentration_experiment(const TwoOutcomePovm& povm, double alpha,
                                                    int trials, RngStream& rng) {
    if (trials < 100) throw std::invalid_argument("concentration_experiment: need >= 100 trials");
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("concentration_experiment: alpha must lie in [0, 1]");
    const int d = povm.dim();
    const double trace_m = povm.light_trace();
    const double center = trace_m / d;
    const double halfwidth = 2.0 * alpha * std::sqrt(trace_m) / d;

    long in_window = 0;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (int t = 0; t < trials; ++t) {
        const UnitaryMatrix u = sample_haar_unitary(d, rng);
        const double p = povm_accept_prob(depolarized_state(u, alpha, d), povm);
        if (std::abs(p - center) < halfwidth || halfwidth == 0.0) ++in_window;
        s1 += p;
        s2 += p * p;
        s3 += p * p * p;
        s4 += p * p * p * p;
    }
    const double n = static_cast<double>(trials);
    const double mean = s1 / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    const double m4 = s4 / n - 4.0 * mean * s3 / n + 6.0 * mean * mean * s2 / n -
                      3.0 * mean * mean * mean * mean;
    ConcentrationReport rep;
    rep.trials = trials;
    rep.in_window_fraction = static_cast<double>(in_window) / n;
    rep.window_halfwidth = halfwidth;
    rep.empirical_variance = var;
    rep.variance_bound = alpha * alpha * trace_m / (d * (d + 1.0));
    rep.variance_std_error = std::sqrt(std::max(0.0, m4 - var * var) / n);
    rep.mean_accept = mean;
    return rep;
}

enum class Allocator { SuccessiveRejects, Uniform };

struct BanditTrialResult {
    int selected = 0;
    long copies_consumed = 0;
};

// One classical bandit trial: each state becomes a Bernoulli arm with
// parameter Tr(M tau_k). The sign of c(M,U) orients the search (negative c
// reverses the purity ordering, so bits are flipped); a zero coefficient
// yields a uniform-random guess without consuming copies.
inline BanditTrialResult fixed_povm_bandit_run(const PrqsiInstance& inst,
                                               const TwoOutcomePovm& povm, long n,
                                               Allocator allocator, RngStream& rng) {
    const int k_arms = inst.k_arms();
    if (n < k_arms) throw std::invalid_argument("fixed_povm_bandit_trial: budget below K");
    const double c = c_coefficient(povm, inst.u);
    if (std::abs(c) < kUninformativeTol)
        return {static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k_arms))), 0};

    std::vector<double> params(k_arms);
    for (int k = 0; k < k_arms; ++k) params[k] = povm_accept_prob(inst.states[k], povm);
    const bool flip = c < 0.0;
    auto sample = [&params, flip](int id, RngStream& r) {
        const double bit = r.next_bernoulli(params[id]) ? 1.0 : 0.0;
        return flip ? 1.0 - bit : bit;
    };

    if (allocator == Allocator::SuccessiveRejects) {
        const BudgetSchedule sched = phase_budgets(n, k_arms, Mode::IM);
        const RunTranscript t =
            detail::successive_rejects_pulls(k_arms, sched, 1, sample, rng, false);
        return {t.selected, t.copies_consumed};
    }

    // Uniform split, final ranking via the same elimination chain.
    const long pulls = n / k_arms;
    std::vector<int> alive = detail::all_ids(k_arms);
    std::vector<double> w(k_arms, 0.0);
    for (int id = 0; id < k_arms; ++id) {
        double sum = 0.0;
        for (long p = 0; p < pulls; ++p) sum += sample(id, rng);
        w[id] = sum / pulls;
    }
    for (int k = 1; k <= k_arms - 1; ++k) {
        std::vector<double> alive_w;
        for (int id : alive) alive_w.push_back(w[id]);
        detail::remove_id(alive, argmin_id(alive, alive_w));
    }
    return {alive.front(), static_cast<long>(k_arms) * pulls};
}

inline int fixed_povm_bandit_trial(const PrqsiInstance& inst, const TwoOutcomePovm& povm, long n,
                                   Allocator allocator, RngStream& rng) {
    return fixed_povm_bandit_run(inst, povm, n, allocator, rng).selected;
}

}  // namespace pqsi
