// identify.hpp
// Fixed-budget successive-rejects drivers: the incoherent collision-based
// identifier, the coherent SWAP-test identifier, a uniform-allocation
// baseline, budget accounting, and theoretical exponent reporting.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pqsi/estimate.hpp"

namespace pqsi {

enum class Mode { IM, CM };

inline const char* mode_name(Mode m) { return m == Mode::IM ? "IM" : "CM"; }

// Cumulative per-state phase budgets N_1 <= ... <= N_{K-1}. IM budgets count
// copies; CM budgets count SWAP tests (2 copies each), hence the extra 1/2.
struct BudgetSchedule {
    Mode mode = Mode::IM;
    int k_arms = 0;
    long total_budget = 0;
    double logbar_k = 0.0;
    std::vector<long> n_k;
};

inline BudgetSchedule phase_budgets(long n, int k_arms, Mode mode) {
    if (k_arms < 2) throw std::invalid_argument("phase_budgets: K must be >= 2");
    if (n <= k_arms)
        throw std::invalid_argument("phase_budgets: budget must exceed one probe per arm");
    BudgetSchedule sched;
    sched.mode = mode;
    sched.k_arms = k_arms;
    sched.total_budget = n;
    sched.logbar_k = logbar(k_arms);
    const double factor = (mode == Mode::IM ? 1.0 : 0.5) / sched.logbar_k;
    sched.n_k.reserve(k_arms - 1);
    for (int k = 1; k <= k_arms - 1; ++k) {
        const double raw = factor * static_cast<double>(n - k_arms) / (k_arms + 1 - k);
        sched.n_k.push_back(static_cast<long>(std::ceil(raw)));
    }
    return sched;
}

struct PhaseRecord {
    int phase = 0;
    int eliminated = 0;
    long n_samples = 0;              // cumulative bases (IM) or pulls (CM) per survivor
    std::vector<int> survivor_ids;   // survivors entering the phase
    std::vector<double> w_values;    // aligned with survivor_ids
};

struct RunTranscript {
    int selected = 0;
    std::vector<PhaseRecord> eliminations;
    long copies_consumed = 0;
    Mode mode = Mode::IM;
    int m = 0;  // copies per basis (IM only; 0 otherwise)
    std::uint64_t seed = 0;
};

// Elimination rule shared by every driver: smallest w goes, ties resolved to
// the lowest index.
inline int argmin_id(const std::vector<int>& ids, const std::vector<double>& w) {
    int best = ids.front();
    double best_w = w.front();
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (w[i] < best_w || (w[i] == best_w && ids[i] < best)) {
            best = ids[i];
            best_w = w[i];
        }
    }
    return best;
}

// One phase record per line: phase, survivor:w pairs at full precision, then
// the eliminated id.
inline std::string format_transcript(const RunTranscript& t) {
    std::ostringstream out;
    char buf[64];
    for (const auto& rec : t.eliminations) {
        out << rec.phase;
        for (std::size_t i = 0; i < rec.survivor_ids.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", rec.w_values[i]);
            out << ' ' << rec.survivor_ids[i] << ':' << buf;
        }
        out << " -> " << rec.eliminated << '\n';
    }
    return out.str();
}

namespace detail {

inline std::vector<int> all_ids(int k_arms) {
    std::vector<int> ids(k_arms);
    for (int i = 0; i < k_arms; ++i) ids[i] = i;
    return ids;
}

inline void remove_id(std::vector<int>& ids, int id) {
    ids.erase(std::find(ids.begin(), ids.end(), id));
}

// Successive rejects over arms that emit one number per pull (SWAP-test
// accept bits, Bernoulli rewards). w is the cumulative mean over all pulls
// so far, matching the algorithms' full-range summation bounds.
template <typename SamplePull>
RunTranscript successive_rejects_pulls(int k_arms, const BudgetSchedule& sched,
                                       int copies_per_pull, SamplePull&& sample,
                                       RngStream& rng, bool strict_budget) {
    RunTranscript t;
    t.mode = sched.mode;
    t.seed = rng.stream_id();
    std::vector<int> alive = all_ids(k_arms);
    std::vector<double> sums(k_arms, 0.0);
    long pulls_done = 0;  // cumulative pulls per surviving arm

    for (int k = 1; k <= k_arms - 1; ++k) {
        long target = sched.n_k[k - 1];
        if (strict_budget) {
            const long cost_per_pull = static_cast<long>(alive.size()) * copies_per_pull;
            const long affordable = (sched.total_budget - t.copies_consumed) / cost_per_pull;
            target = std::min(target, pulls_done + std::max<long>(affordable, 0));
        }
        const long new_pulls = std::max<long>(target - pulls_done, 0);
        for (int id : alive)
            for (long p = 0; p < new_pulls; ++p) sums[id] += sample(id, rng);
        t.copies_consumed += static_cast<long>(alive.size()) * new_pulls * copies_per_pull;
        pulls_done += new_pulls;

        PhaseRecord rec;
        rec.phase = k;
        rec.n_samples = pulls_done;
        rec.survivor_ids = alive;
        rec.w_values.reserve(alive.size());
        for (int id : alive)
            rec.w_values.push_back(pulls_done > 0 ? sums[id] / pulls_done : 0.0);
        rec.eliminated = argmin_id(rec.survivor_ids, rec.w_values);
        remove_id(alive, rec.eliminated);
        t.eliminations.push_back(std::move(rec));
    }
    t.selected = alive.front();
    return t;
}

}  // namespace detail

// Incoherent identifier: pre-draws floor(N/m) Haar bases, measures every
// survivor m times per new basis, scores states by the running mean of the
// collision statistic over all bases seen so far, and eliminates the argmin
// once per phase.
inline RunTranscript run_im_pqsi(const StateEnsemble& ens, long n, int m, RngStream& rng,
                                 bool strict_budget = false) {
    const int k_arms = ens.k_arms();
    if (m < 2) throw std::invalid_argument("run_im_pqsi: m must be >= 2");
    if (n <= static_cast<long>(k_arms) * m)
        throw std::invalid_argument("run_im_pqsi: budget must exceed K*m");
    const BudgetSchedule sched = phase_budgets(n, k_arms, Mode::IM);
    if (sched.n_k.front() / m < 1)
        throw std::invalid_argument("run_im_pqsi: budget exhausted before one basis per survivor");

    const long basis_pool = n / m;
    std::vector<UnitaryMatrix> bases;
    bases.reserve(basis_pool);
    for (long j = 0; j < basis_pool; ++j) bases.push_back(sample_haar_unitary(ens.dim, rng));

    RunTranscript t;
    t.mode = Mode::IM;
    t.m = m;
    t.seed = rng.stream_id();
    std::vector<int> alive = detail::all_ids(k_arms);
    std::vector<double> g_sums(k_arms, 0.0);
    long bases_done = 0;  // cumulative basis count per surviving arm

    for (int k = 1; k <= k_arms - 1; ++k) {
        long target = std::min(sched.n_k[k - 1] / m, basis_pool);
        if (strict_budget) {
            const long cost_per_basis = static_cast<long>(alive.size()) * m;
            const long affordable = (n - t.copies_consumed) / cost_per_basis;
            target = std::min(target, bases_done + std::max<long>(affordable, 0));
        }
        const long new_bases = std::max<long>(target - bases_done, 0);
        for (int id : alive) {
            for (long j = bases_done; j < bases_done + new_bases; ++j) {
                const RotatedBasis basis{bases[static_cast<std::size_t>(j)]};
                const OutcomeDistribution dist = rotated_basis_distribution(ens.states[id], basis);
                const std::vector<int> outcomes = sample_outcomes(dist, m, rng);
                g_sums[id] += collision_estimator(outcomes, ens.dim, static_cast<int>(j)).g_tilde;
            }
        }
        t.copies_consumed += static_cast<long>(alive.size()) * m * new_bases;
        bases_done += new_bases;

        PhaseRecord rec;
        rec.phase = k;
        rec.n_samples = bases_done;
        rec.survivor_ids = alive;
        rec.w_values.reserve(alive.size());
        for (int id : alive)
            rec.w_values.push_back(bases_done > 0 ? g_sums[id] / bases_done : 0.0);
        rec.eliminated = argmin_id(rec.survivor_ids, rec.w_values);
        detail::remove_id(alive, rec.eliminated);
        t.eliminations.push_back(std::move(rec));
    }
    t.selected = alive.front();
    return t;
}

// Coherent identifier: SWAP tests against each survivor's true outcome law,
// two copies per test.
inline RunTranscript run_cm_pqsi(const StateEnsemble& ens, long n, RngStream& rng,
                                 bool strict_budget = false) {
    const int k_arms = ens.k_arms();
    if (n <= 2L * k_arms)
        throw std::invalid_argument("run_cm_pqsi: budget must exceed 2K");
    const BudgetSchedule sched = phase_budgets(n, k_arms, Mode::CM);
    auto sample = [&ens](int id, RngStream& r) {
        return static_cast<double>(swap_test_sample(ens.purities[id], r));
    };
    return detail::successive_rejects_pulls(k_arms, sched, 2, sample, rng, strict_budget);
}

// Control strategy: equal split of the budget, one statistic per state, and a
// single final ranking. The transcript synthesizes the elimination order by
// repeatedly removing the argmin of the final w values.
inline RunTranscript run_uniform_baseline(const StateEnsemble& ens, long n, Mode mode, int m,
                                          RngStream& rng) {
    const int k_arms = ens.k_arms();
    RunTranscript t;
    t.mode = mode;
    t.seed = rng.stream_id();
    std::vector<double> w(k_arms, 0.0);

    if (mode == Mode::IM) {
        if (m < 2) throw std::invalid_argument("run_uniform_baseline: m must be >= 2");
        const long per_state = n / k_arms;
        const long n_bases = per_state / m;
        if (n_bases < 1)
            throw std::invalid_argument("run_uniform_baseline: budget below one basis per state");
        std::vector<UnitaryMatrix> bases;
        bases.reserve(n_bases);
        for (long j = 0; j < n_bases; ++j) bases.push_back(sample_haar_unitary(ens.dim, rng));
        for (int id = 0; id < k_arms; ++id) {
            double sum = 0.0;
            for (long j = 0; j < n_bases; ++j) {
                const RotatedBasis basis{bases[static_cast<std::size_t>(j)]};
                const OutcomeDistribution dist = rotated_basis_distribution(ens.states[id], basis);
                const std::vector<int> outcomes = sample_outcomes(dist, m, rng);
                sum += collision_estimator(outcomes, ens.dim, static_cast<int>(j)).g_tilde;
            }
            w[id] = sum / n_bases;
        }
        t.m = m;
        t.copies_consumed = static_cast<long>(k_arms) * m * n_bases;
    } else {
        const long tests = n / (2L * k_arms);
        if (tests < 1)
            throw std::invalid_argument("run_uniform_baseline: budget below one SWAP test per state");
        for (int id = 0; id < k_arms; ++id) {
            long sum = 0;
            for (long p = 0; p < tests; ++p) sum += swap_test_sample(ens.purities[id], rng);
            w[id] = static_cast<double>(sum) / tests;
        }
        t.copies_consumed = 2L * k_arms * tests;
    }

    const long per_state_samples =
        mode == Mode::IM ? (n / k_arms) / m : n / (2L * k_arms);
    std::vector<int> alive = detail::all_ids(k_arms);
    for (int k = 1; k <= k_arms - 1; ++k) {
        PhaseRecord rec;
        rec.phase = k;
        rec.n_samples = per_state_samples;
        rec.survivor_ids = alive;
        for (int id : alive) rec.w_values.push_back(w[id]);
        rec.eliminated = argmin_id(rec.survivor_ids, rec.w_values);
        detail::remove_id(alive, rec.eliminated);
        t.eliminations.push_back(std::move(rec));
    }
    t.selected = alive.front();
    return t;
}

// Flattens a transcript into per-state phase statistics.
inline std::vector<PhaseStat> phase_stats(const RunTranscript& t) {
    std::vector<PhaseStat> stats;
    for (const auto& rec : t.eliminations)
        for (std::size_t i = 0; i < rec.survivor_ids.size(); ++i)
            stats.push_back(PhaseStat{rec.w_values[i], rec.survivor_ids[i], rec.phase,
                                      static_cast<int>(rec.n_samples)});
    return stats;
}

// Theoretical quantities for an ensemble at budget N. The coherent envelope
// carries its full constant; the incoherent bounds are exponent arguments
// with the hidden constant set to 1.
struct ExponentReport {
    double im_h1_arg = 0.0;     // N H1 / (logbarK d)
    double cm_h2_arg = 0.0;     // N H2 / logbarK
    double im_h1_d2_arg = 0.0;  // N H1 / (logbarK d^2)
    double cm_envelope = 0.0;   // K(K-1)/2 * exp(-N H2 / (8 logbarK))
    bool im_unconstanted = true;
    GapProfile profile;
};

inline ExponentReport theoretical_exponents_from(const std::vector<double>& purities, int d,
                                                 long n) {
    ExponentReport rep;
    rep.profile = gap_profile_from_purities(purities);
    const double k_arms = static_cast<double>(purities.size());
    const double nn = static_cast<double>(n);
    rep.im_h1_arg = nn * rep.profile.h1 / (rep.profile.logbar_k * d);
    rep.cm_h2_arg = nn * rep.profile.h2 / rep.profile.logbar_k;
    rep.im_h1_d2_arg = nn * rep.profile.h1 / (rep.profile.logbar_k * d * d);
    rep.cm_envelope =
        0.5 * k_arms * (k_arms - 1.0) * std::exp(-nn * rep.profile.h2 / (8.0 * rep.profile.logbar_k));
    return rep;
}

inline ExponentReport theoretical_exponents(const StateEnsemble& ens, long n) {
    return theoretical_exponents_from(ens.purities, ens.dim, n);
}

}  // namespace pqsi
