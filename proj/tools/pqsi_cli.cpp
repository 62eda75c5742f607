// Command-line front end: run experiments from config files, print
// theoretical exponents, and execute the built-in invariant suites.
//
// Exit codes: 0 success, 1 config error, 2 invariant-suite failure.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "pqsi/pqsi.hpp"

namespace {

using namespace pqsi;

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool need_config) {
    auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file");
    if (need_config) opt->required();
    cmd->add_option("--seed", flags.seed, "override the config's master seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out_path, "override the config's output path");
    cmd->add_option("--workers", flags.workers, "worker thread count");
    cmd->add_flag("--strict-budget", flags.strict, "clamp the final phase to the copy budget");
}

ExperimentConfig load_config(const CommonFlags& flags) {
    ExperimentConfig cfg = parse_config_file(flags.config_path);
    if (flags.seed_set) cfg.master_seed = flags.seed;
    if (!flags.out_path.empty()) cfg.output_path = flags.out_path;
    if (flags.workers > 0) cfg.workers = flags.workers;
    if (flags.strict) cfg.strict_budget = true;
    return validate_config(cfg);
}

void print_rows(const SweepResult& result) {
    for (const auto& row : result.rows) {
        std::printf("%s d=%d K=%d N=%ld m=%d trials=%ld err=%.6g wilson=[%.6g, %.6g] %s=%.6g "
                    "copies=%.6g\n",
                    row.experiment.c_str(), row.d, row.k, row.n, row.m, row.trials,
                    row.empirical_error, row.wilson_low, row.wilson_high,
                    row.theory_kind.c_str(), row.theory_value, row.mean_copies);
    }
}

int run_simulate(const CommonFlags& flags, bool single_cell) {
    ExperimentConfig cfg = load_config(flags);
    if (single_cell) {
        if (cfg.dims.size() != 1)
            throw ConfigError("dims: simulate expects exactly one dimension (use sweep for grids)");
        if (!cfg.budgets.empty() && cfg.budgets.size() != 1)
            throw ConfigError("budgets: simulate expects exactly one budget (use sweep for grids)");
    }
    bool floored = false;
    resolve_m(cfg.m_policy, cfg.dims.front(), &floored);
    if (floored)
        std::fprintf(stderr, "note: m policy resolved below 2; floored to m=2\n");
    const SweepResult result = run_sweep(cfg);
    print_rows(result);
    write_outputs(result, cfg.output_path);
    std::printf("wrote %s and %s.timing\n", cfg.output_path.c_str(), cfg.output_path.c_str());
    return 0;
}

int run_exponents(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_config(flags);
    if (cfg.purities.size() < 2)
        throw ConfigError("purities: exponents requires an ensemble purity list");
    const GapProfile profile = gap_profile_from_purities(cfg.purities);
    std::printf("K=%zu logbar=%.17g H1=%.17g H2=%.17g\ndeltas:", cfg.purities.size(),
                profile.logbar_k, profile.h1, profile.h2);
    for (double delta : profile.deltas_sorted) std::printf(" %.17g", delta);
    std::printf("\n");
    for (int d : cfg.dims) {
        for (long n : cfg.budgets.empty() ? std::vector<long>{1000} : cfg.budgets) {
            const ExponentReport rep = theoretical_exponents_from(cfg.purities, d, n);
            std::printf("d=%d N=%ld im_h1_arg=%.6g (unconstanted) cm_h2_arg=%.6g "
                        "im_h1_d2_arg=%.6g cm_envelope=%.6g\n",
                        d, n, rep.im_h1_arg, rep.cm_h2_arg, rep.im_h1_d2_arg, rep.cm_envelope);
        }
    }
    return 0;
}

// Fast seeded invariant suites; prints one line per suite.
int run_verify() {
    int failures = 0;
    const auto report = [&failures](const char* name, bool ok, const std::string& note = "") {
        std::printf("[%s] %s%s%s\n", ok ? "ok" : "FAIL", name, note.empty() ? "" : ": ",
                    note.c_str());
        if (!ok) ++failures;
    };

    {
        RngStream rng(1001);
        bool ok = true;
        for (int i = 0; i < 500; ++i)
            ok &= unitarity_error(sample_haar_unitary(4, rng).mat()) <= kUnitaryTol;
        report("haar unitarity (500 draws, d=4)", ok);
    }
    {
        bool ok = true;
        for (int trip = 0; trip < 3; ++trip) {
            RngStream gen = RngStream::from_keys({1002, static_cast<std::uint64_t>(trip)});
            const CMatrix g1 = sample_ginibre(4, gen), g2 = sample_ginibre(4, gen),
                          g3 = sample_ginibre(4, gen);
            RngStream mc = RngStream::from_keys({1003, static_cast<std::uint64_t>(trip)});
            const MomentReport rep =
                verify_haar_moments(0.5 * (g1 + g1.adjoint()), 0.5 * (g2 + g2.adjoint()),
                                    0.5 * (g3 + g3.adjoint()), 20000, mc);
            ok &= rep.first.within(5.0) && rep.second.within(5.0) && rep.third.within(5.0);
        }
        report("haar moment identities (3 triples, 2e4 samples)", ok);
    }
    {
        RngStream rng(1004);
        bool ok = true;
        for (int d : {2, 3}) {
            for (int m : {2, 3}) {
                std::vector<double> probs(d);
                double sum = 0.0;
                for (double& p : probs) {
                    p = rng.next_double() + 0.05;
                    sum += p;
                }
                for (double& p : probs) p /= sum;
                // Exhaustive enumeration of d^m sequences via pairwise counts.
                std::vector<int> seq(m, 0);
                double mean = 0.0;
                for (;;) {
                    double p_seq = 1.0;
                    for (int x : seq) p_seq *= probs[x];
                    int pairs = 0;
                    for (int a = 0; a < m; ++a)
                        for (int b = 0; b < m; ++b)
                            if (a != b && seq[a] == seq[b]) ++pairs;
                    mean += p_seq * pairs / (static_cast<double>(m) * m);
                    int pos = m - 1;
                    while (pos >= 0 && seq[pos] == d - 1) seq[pos--] = 0;
                    if (pos < 0) break;
                    ++seq[pos];
                }
                ok &= std::abs(mean - collision_expectation(OutcomeDistribution(probs), m)) <=
                      1e-12;
            }
        }
        report("collision estimator unbiasedness (exhaustive)", ok);
    }
    {
        RngStream rng(1005);
        bool ok = true;
        for (int d : {2, 4, 8}) {
            const UnitaryMatrix u = sample_haar_unitary(d, rng);
            for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const double expected = (1.0 + (d - 1) * alpha * alpha) / d;
                ok &= std::abs(purity(depolarized_state(u, alpha, d)) - expected) <= 1e-10;
                ok &= std::abs(alpha_from_purity(expected, d) - alpha) <= 1e-12;
            }
        }
        report("depolarized-family purity closed form", ok);
    }
    {
        RngStream rng(1006);
        bool ok = true;
        for (double z : {0.5, 0.9, 1.0}) {
            const int n = 20000;
            long acc = 0;
            for (int i = 0; i < n; ++i) acc += swap_test_sample(z, rng);
            const double target = 0.5 * (1.0 + z);
            ok &= std::abs(acc / static_cast<double>(n) - target) <=
                  4.0 * std::sqrt(target * (1 - target) / n) + 1e-12;
        }
        report("swap-test accept law", ok);
    }
    {
        bool ok = true;
        for (int d : {2, 4, 8}) {
            RngStream rng = RngStream::from_keys({1007, static_cast<std::uint64_t>(d)});
            const UnitaryMatrix u = sample_haar_unitary(d, rng);
            std::vector<double> zs{1.0 / d + 0.7 * (1 - 1.0 / d), 1.0 / d + 0.3 * (1 - 1.0 / d)};
            const PrqsiInstance inst = build_prqsi_states(zs, d, u);
            CVector b(d);
            for (int i = 0; i < d; ++i) b(i) = Complex(rng.next_double(), 0.0);
            const UnitaryMatrix v = sample_haar_unitary(d, rng);
            const TwoOutcomePovm povm(v.mat() * b.asDiagonal() * v.mat().adjoint());
            ok &= affine_identity_check(inst, povm) <= 1e-10;
        }
        report("affine reduction identity", ok);
    }
    {
        RngStream rng(1008);
        const ConcentrationReport rep =
            concentration_experiment(TwoOutcomePovm::diagonal_projector(8, 16), 0.3, 500, rng);
        const bool ok = rep.in_window_fraction >= 0.75 - 3.0 * std::sqrt(0.25 / 500) &&
                        rep.empirical_variance <=
                            rep.variance_bound + 3.0 * rep.variance_std_error;
        report("concentration window and variance bound", ok);
    }
    {
        const BudgetSchedule im = phase_budgets(12, 2, Mode::IM);
        const BudgetSchedule cm = phase_budgets(12, 2, Mode::CM);
        const auto zero = wilson_interval(0, 100, 0.95);
        const auto full = wilson_interval(100, 100, 0.95);
        report("budget schedules and wilson endpoints",
               im.n_k == std::vector<long>{5} && cm.n_k == std::vector<long>{3} &&
                   zero.first == 0.0 && full.second == 1.0);
    }

    if (failures == 0) std::printf("all invariant suites passed\n");
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"purest-quantum-state identification simulation lab"};
    app.require_subcommand(1);

    CommonFlags sim_flags, sweep_flags, exp_flags;
    CLI::App* simulate = app.add_subcommand("simulate", "run one experiment cell from a config");
    add_common(simulate, sim_flags, true);
    CLI::App* sweep = app.add_subcommand("sweep", "run a (d, N) grid from a config");
    add_common(sweep, sweep_flags, true);
    CLI::App* verify = app.add_subcommand("verify", "run the built-in invariant suites");
    CLI::App* exponents =
        app.add_subcommand("exponents", "print gap profile and theoretical quantities");
    add_common(exponents, exp_flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim_flags, /*single_cell=*/true);
        if (sweep->parsed()) return run_simulate(sweep_flags, /*single_cell=*/false);
        if (verify->parsed()) return run_verify();
        if (exponents->parsed()) return run_exponents(exp_flags);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
