// harness.hpp
// Experiment orchestration: flat key-value config files, seeded Monte Carlo
// sweeps over (d, N) cells with per-trial splittable streams, Wilson score
// intervals, and bit-stable CSV result files (wallclock kept in a sidecar).

#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pqsi/ensemble_io.hpp"
#include "pqsi/lowerbound.hpp"

namespace pqsi {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Experiment {
    ImSweep,
    CmSweep,
    BaselineSweep,
    LowerboundSweep,
    MomentCheck,
    Concentration,
};

inline const char* experiment_name(Experiment e) {
    switch (e) {
        case Experiment::ImSweep: return "im_sweep";
        case Experiment::CmSweep: return "cm_sweep";
        case Experiment::BaselineSweep: return "baseline_sweep";
        case Experiment::LowerboundSweep: return "lowerbound_sweep";
        case Experiment::MomentCheck: return "moment_check";
        case Experiment::Concentration: return "concentration";
    }
    return "unknown";
}

inline Experiment experiment_from_string(const std::string& s) {
    if (s == "im_sweep") return Experiment::ImSweep;
    if (s == "cm_sweep") return Experiment::CmSweep;
    if (s == "baseline_sweep") return Experiment::BaselineSweep;
    if (s == "lowerbound_sweep") return Experiment::LowerboundSweep;
    if (s == "moment_check") return Experiment::MomentCheck;
    if (s == "concentration") return Experiment::Concentration;
    throw ConfigError("experiment: unknown value '" + s + "'");
}

// Copies-per-basis policy for the incoherent driver: a fixed m, the
// m = ceil(1/sqrt(c)) rule for a caller-supplied gap floor c, or m = d.
struct MPolicy {
    enum class Kind { Fixed, SqrtC, EqualD } kind = Kind::Fixed;
    int fixed_m = 2;
    double c = 1.0;
};

// m is floored at 2 (a single copy per basis carries no collision signal);
// floored reports when the floor bound.
inline int resolve_m(const MPolicy& policy, int d, bool* floored = nullptr) {
    int m = 2;
    switch (policy.kind) {
        case MPolicy::Kind::Fixed: m = policy.fixed_m; break;
        case MPolicy::Kind::SqrtC: m = static_cast<int>(std::ceil(1.0 / std::sqrt(policy.c))); break;
        case MPolicy::Kind::EqualD: m = d; break;
    }
    if (floored) *floored = m < 2;
    return std::max(m, 2);
}

struct PovmSpec {
    enum class Kind { Projector, HalfIdentity } kind = Kind::Projector;
    int rank = 0;

    TwoOutcomePovm build(int d) const {
        return kind == Kind::Projector ? TwoOutcomePovm::diagonal_projector(rank, d)
                                       : TwoOutcomePovm::half_identity(d);
    }
};

struct EnsembleSource {
    enum class Kind { Purities, Preset, File } kind = Kind::Purities;
    std::string name;  // preset name or file path
};

struct ExperimentConfig {
    Experiment experiment = Experiment::CmSweep;
    std::vector<double> purities;
    EnsembleSource ensemble;
    RotationMode rotation = RotationMode::Independent;
    std::vector<int> dims;
    std::vector<long> budgets;
    MPolicy m_policy;
    int trials_per_cell = 1;
    std::uint64_t master_seed = 0;
    std::string output_path = "results.csv";
    bool strict_budget = false;
    Mode baseline_mode = Mode::CM;
    PovmSpec povm;
    double alpha = 0.3;
    Allocator allocator = Allocator::SuccessiveRejects;
    int workers = 1;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

inline double parse_double(const std::string& field, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(field + ": expected a number, got '" + s + "'");
    }
}

inline long parse_long(const std::string& field, const std::string& s) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError(field + ": expected an integer, got '" + s + "'");
    }
}

inline bool parse_bool(const std::string& field, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(field + ": expected true/false, got '" + s + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool saw_experiment = false;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));

        if (key == "experiment") {
            cfg.experiment = experiment_from_string(value);
            saw_experiment = true;
        } else if (key == "purities") {
            cfg.purities.clear();
            for (const auto& item : detail::split_list(value))
                cfg.purities.push_back(detail::parse_double("purities", item));
            cfg.ensemble.kind = EnsembleSource::Kind::Purities;
        } else if (key == "ensemble") {
            if (value.rfind("preset:", 0) == 0) {
                cfg.ensemble = {EnsembleSource::Kind::Preset, value.substr(7)};
            } else if (value.rfind("file:", 0) == 0) {
                cfg.ensemble = {EnsembleSource::Kind::File, value.substr(5)};
            } else {
                throw ConfigError("ensemble: expected 'preset:<name>' or 'file:<path>', got '" +
                                  value + "'");
            }
        } else if (key == "rotation") {
            if (value == "shared") cfg.rotation = RotationMode::Shared;
            else if (value == "independent") cfg.rotation = RotationMode::Independent;
            else throw ConfigError("rotation: expected shared/independent, got '" + value + "'");
        } else if (key == "dims") {
            cfg.dims.clear();
            for (const auto& item : detail::split_list(value))
                cfg.dims.push_back(static_cast<int>(detail::parse_long("dims", item)));
        } else if (key == "budgets") {
            cfg.budgets.clear();
            for (const auto& item : detail::split_list(value))
                cfg.budgets.push_back(detail::parse_long("budgets", item));
        } else if (key == "m_policy") {
            if (value == "equal_d") {
                cfg.m_policy = {MPolicy::Kind::EqualD, 0, 0.0};
            } else if (value.rfind("fixed:", 0) == 0) {
                cfg.m_policy = {MPolicy::Kind::Fixed,
                                static_cast<int>(detail::parse_long("m_policy", value.substr(6))),
                                0.0};
            } else if (value.rfind("sqrt_c:", 0) == 0) {
                cfg.m_policy = {MPolicy::Kind::SqrtC, 0,
                                detail::parse_double("m_policy", value.substr(7))};
            } else {
                throw ConfigError(
                    "m_policy: expected fixed:<m>, sqrt_c:<c>, or equal_d; got '" + value + "'");
            }
        } else if (key == "trials_per_cell") {
            cfg.trials_per_cell = static_cast<int>(detail::parse_long("trials_per_cell", value));
        } else if (key == "master_seed") {
            try {
                cfg.master_seed = std::stoull(value);
            } catch (...) {
                throw ConfigError("master_seed: expected an unsigned integer, got '" + value + "'");
            }
        } else if (key == "output_path") {
            cfg.output_path = value;
        } else if (key == "strict_budget") {
            cfg.strict_budget = detail::parse_bool("strict_budget", value);
        } else if (key == "baseline_mode") {
            if (value == "im") cfg.baseline_mode = Mode::IM;
            else if (value == "cm") cfg.baseline_mode = Mode::CM;
            else throw ConfigError("baseline_mode: expected im/cm, got '" + value + "'");
        } else if (key == "povm") {
            if (value == "half_identity") {
                cfg.povm = {PovmSpec::Kind::HalfIdentity, 0};
            } else if (value.rfind("projector:", 0) == 0) {
                cfg.povm = {PovmSpec::Kind::Projector,
                            static_cast<int>(detail::parse_long("povm", value.substr(10)))};
            } else {
                throw ConfigError("povm: expected projector:<rank> or half_identity, got '" +
                                  value + "'");
            }
        } else if (key == "alpha") {
            cfg.alpha = detail::parse_double("alpha", value);
        } else if (key == "allocator") {
            if (value == "successive_rejects") cfg.allocator = Allocator::SuccessiveRejects;
            else if (value == "uniform") cfg.allocator = Allocator::Uniform;
            else
                throw ConfigError("allocator: expected successive_rejects/uniform, got '" + value +
                                  "'");
        } else if (key == "workers") {
            cfg.workers = static_cast<int>(detail::parse_long("workers", value));
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (!saw_experiment) throw ConfigError("experiment: missing required key");
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

// Resolves preset purities/rotation/dims and checks every field the sweep
// will rely on, reporting offenders by name.
inline ExperimentConfig validate_config(ExperimentConfig cfg) {
    if (cfg.trials_per_cell < 1) throw ConfigError("trials_per_cell: must be >= 1");
    if (cfg.workers < 1) throw ConfigError("workers: must be >= 1");
    for (std::size_t i = 1; i < cfg.budgets.size(); ++i)
        if (cfg.budgets[i] <= cfg.budgets[i - 1])
            throw ConfigError("budgets: values must be strictly increasing");

    if (cfg.ensemble.kind == EnsembleSource::Kind::Preset) {
        const EnsemblePreset preset = ensemble_preset(cfg.ensemble.name);  // throws if unknown
        cfg.purities = preset.purities;
        cfg.rotation = preset.rotation;
        if (cfg.dims.empty()) cfg.dims = {preset.dim};
    }
    if (cfg.dims.empty()) throw ConfigError("dims: at least one dimension is required");
    for (int d : cfg.dims)
        if (d < 2) throw ConfigError("dims: dimensions must be >= 2");

    const bool needs_budgets = cfg.experiment == Experiment::ImSweep ||
                               cfg.experiment == Experiment::CmSweep ||
                               cfg.experiment == Experiment::BaselineSweep ||
                               cfg.experiment == Experiment::LowerboundSweep;
    if (needs_budgets && cfg.budgets.empty())
        throw ConfigError("budgets: at least one budget is required for this experiment");

    const bool needs_ensemble = needs_budgets;
    if (needs_ensemble && cfg.ensemble.kind != EnsembleSource::Kind::File) {
        if (cfg.purities.size() < 2)
            throw ConfigError("purities: at least two purities are required");
        for (int d : cfg.dims)
            for (double z : cfg.purities)
                if (z < 1.0 / d - 1e-12 || z > 1.0 + 1e-12)
                    throw ConfigError("purities: value outside [1/d, 1] for d=" + std::to_string(d));
    }
    if (cfg.experiment == Experiment::LowerboundSweep ||
        cfg.experiment == Experiment::Concentration) {
        if (cfg.povm.kind == PovmSpec::Kind::Projector)
            for (int d : cfg.dims)
                if (cfg.povm.rank < 0 || cfg.povm.rank > d)
                    throw ConfigError("povm: projector rank out of range for d=" +
                                      std::to_string(d));
        if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ConfigError("alpha: must lie in [0, 1]");
    }
    if (cfg.m_policy.kind == MPolicy::Kind::Fixed && cfg.m_policy.fixed_m < 2)
        throw ConfigError("m_policy: fixed m must be >= 2");
    if (cfg.m_policy.kind == MPolicy::Kind::SqrtC && cfg.m_policy.c <= 0.0)
        throw ConfigError("m_policy: sqrt_c gap must be positive");
    return cfg;
}

// Acklam's rational approximation of the standard normal quantile
// (|error| < 1.2e-9), enough for confidence multipliers.
inline double inverse_normal_cdf(double p) {
    if (p <= 0.0 || p >= 1.0)
        throw std::domain_error("inverse_normal_cdf: p must lie in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Wilson score interval for the proportion successes/trials.
inline std::pair<double, double> wilson_interval(long successes, long trials, double confidence) {
    if (trials < 1) throw std::invalid_argument("wilson_interval: trials must be >= 1");
    if (successes < 0 || successes > trials)
        throw std::invalid_argument("wilson_interval: successes out of range");
    if (confidence <= 0.0 || confidence >= 1.0)
        throw std::invalid_argument("wilson_interval: confidence must lie in (0, 1)");
    const double z = inverse_normal_cdf(0.5 * (1.0 + confidence));
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    // The endpoints are exact at the boundary proportions; avoid sqrt jitter.
    const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
    const double high = successes == trials ? 1.0 : std::min(1.0, center + half);
    return {low, high};
}

struct SweepRow {
    std::string experiment;
    int d = 0;
    int k = 0;
    long n = 0;
    int m = 0;
    long trials = 0;
    long successes = 0;
    double empirical_error = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 0.0;
    double theory_value = 0.0;
    std::string theory_kind;
    double mean_copies = 0.0;
    std::uint64_t seed = 0;
    double wallclock_ms = 0.0;               // sidecar only
    std::vector<unsigned char> trial_success;  // in-process only (prefix-stability checks)
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

namespace detail {

// Stream salts separating the per-trial sub-streams.
inline constexpr std::uint64_t kSaltEnsemble = 0xE5;
inline constexpr std::uint64_t kSaltRun = 0xA1;
inline constexpr std::uint64_t kSaltMoment = 0x3C;

inline RngStream trial_stream(const ExperimentConfig& cfg, std::uint64_t d, std::uint64_t n,
                              std::uint64_t trial, std::uint64_t salt) {
    return RngStream::from_keys({cfg.master_seed, static_cast<std::uint64_t>(cfg.experiment), d, n,
                                 trial, salt});
}

struct TrialOutcome {
    bool success = false;
    long copies = 0;
};

// Runs trials_per_cell independent trials, parallelized over a worker pool;
// outcomes land in trial order so assembly is order-stable.
template <typename TrialFn>
std::vector<TrialOutcome> run_trials(int trials, int workers, TrialFn&& fn) {
    std::vector<TrialOutcome> outcomes(trials);
    if (workers <= 1) {
        for (int i = 0; i < trials; ++i) outcomes[i] = fn(i);
        return outcomes;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= trials || failed.load()) break;
            try {
                outcomes[i] = fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                break;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(workers, trials);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return outcomes;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline SweepRow finish_identification_row(const ExperimentConfig& cfg, int d, long n, int m,
                                          const std::vector<double>& purities,
                                          const std::vector<TrialOutcome>& outcomes) {
    SweepRow row;
    row.experiment = experiment_name(cfg.experiment);
    row.d = d;
    row.k = static_cast<int>(purities.size());
    row.n = n;
    row.m = m;
    row.trials = outcomes.size();
    double copies_sum = 0.0;
    for (const auto& o : outcomes) {
        row.successes += o.success ? 1 : 0;
        copies_sum += static_cast<double>(o.copies);
        row.trial_success.push_back(o.success ? 1 : 0);
    }
    const long errors = row.trials - row.successes;
    row.empirical_error = static_cast<double>(errors) / row.trials;
    std::tie(row.wilson_low, row.wilson_high) = wilson_interval(errors, row.trials, 0.95);
    row.mean_copies = copies_sum / row.trials;
    row.seed = cfg.master_seed;

    const ExponentReport rep = theoretical_exponents_from(purities, d, n);
    switch (cfg.experiment) {
        case Experiment::ImSweep:
            row.theory_value = rep.im_h1_arg;
            row.theory_kind = "im_omega_arg";
            break;
        case Experiment::CmSweep:
            row.theory_value = rep.cm_envelope;
            row.theory_kind = "cm_envelope";
            break;
        case Experiment::BaselineSweep:
            if (cfg.baseline_mode == Mode::IM) {
                row.theory_value = rep.im_h1_arg;
                row.theory_kind = "im_omega_arg";
            } else {
                row.theory_value = rep.cm_envelope;
                row.theory_kind = "cm_envelope";
            }
            break;
        case Experiment::LowerboundSweep:
            if (cfg.povm.kind == PovmSpec::Kind::HalfIdentity) {
                row.theory_value = (row.k - 1.0) / row.k;
                row.theory_kind = "uninformative_ceiling";
            } else {
                row.theory_value = std::exp(-static_cast<double>(n) * rep.profile.h1 / d);
                row.theory_kind = "lb_floor_shape";
            }
            break;
        default:
            break;
    }
    return row;
}

}  // namespace detail

inline SweepResult run_sweep(const ExperimentConfig& raw_cfg) {
    const ExperimentConfig cfg = validate_config(raw_cfg);
    SweepResult result;

    // File-backed ensembles are fixed across trials; purity-spec ensembles are
    // redrawn per trial from the trial's own stream.
    const bool file_ensemble = cfg.ensemble.kind == EnsembleSource::Kind::File;
    std::vector<StateEnsemble> file_ens;
    if (file_ensemble) file_ens.push_back(load_ensemble(cfg.ensemble.name));

    for (int d : cfg.dims) {
        if (cfg.experiment == Experiment::MomentCheck) {
            const auto start = std::chrono::steady_clock::now();
            const std::size_t first_row = result.rows.size();
            const int nsamples = cfg.trials_per_cell;
            for (int triple = 0; triple < 5; ++triple) {
                RngStream gen = detail::trial_stream(cfg, d, 0, triple, detail::kSaltEnsemble);
                const auto hermitian = [&gen, d] {
                    CMatrix g = sample_ginibre(d, gen);
                    return CMatrix(0.5 * (g + g.adjoint()));
                };
                const CMatrix a = hermitian(), b = hermitian(), c = hermitian();
                RngStream mc = detail::trial_stream(cfg, d, 0, triple, detail::kSaltMoment);
                const MomentReport rep = verify_haar_moments(a, b, c, nsamples, mc);
                const MomentReport::Entry* entries[3] = {&rep.first, &rep.second, &rep.third};
                for (int order = 0; order < 3; ++order) {
                    SweepRow row;
                    row.experiment = experiment_name(cfg.experiment);
                    row.d = d;
                    row.k = triple;
                    row.n = nsamples;
                    row.m = order + 1;
                    row.trials = 1;
                    row.successes = entries[order]->within(4.0) ? 1 : 0;
                    row.empirical_error = 1.0 - static_cast<double>(row.successes);
                    std::tie(row.wilson_low, row.wilson_high) =
                        wilson_interval(1 - row.successes, 1, 0.95);
                    row.theory_value = entries[order]->target;
                    row.theory_kind = "haar_moment_" + std::to_string(order + 1);
                    row.mean_copies = 0.0;
                    row.seed = cfg.master_seed;
                    result.rows.push_back(std::move(row));
                }
            }
            const auto stop = std::chrono::steady_clock::now();
            const double cell_ms =
                std::chrono::duration<double, std::milli>(stop - start).count();
            for (std::size_t i = first_row; i < result.rows.size(); ++i)
                result.rows[i].wallclock_ms = cell_ms / 15.0;
            continue;
        }

        if (cfg.experiment == Experiment::Concentration) {
            const auto start = std::chrono::steady_clock::now();
            const TwoOutcomePovm povm = cfg.povm.build(d);
            RngStream rng = detail::trial_stream(cfg, d, 0, 0, detail::kSaltRun);
            const ConcentrationReport rep =
                concentration_experiment(povm, cfg.alpha, cfg.trials_per_cell, rng);
            SweepRow row;
            row.experiment = experiment_name(cfg.experiment);
            row.d = d;
            row.k = 1;
            row.n = 0;
            row.m = cfg.povm.kind == PovmSpec::Kind::Projector ? cfg.povm.rank : 0;
            row.trials = rep.trials;
            row.successes = std::lround(rep.in_window_fraction * rep.trials);
            const long misses = row.trials - row.successes;
            row.empirical_error = static_cast<double>(misses) / row.trials;
            std::tie(row.wilson_low, row.wilson_high) = wilson_interval(misses, row.trials, 0.95);
            row.theory_value = 0.25;
            row.theory_kind = "window_miss_ceiling";
            row.mean_copies = 0.0;
            row.seed = cfg.master_seed;
            const auto stop = std::chrono::steady_clock::now();
            row.wallclock_ms = std::chrono::duration<double, std::milli>(stop - start).count();
            result.rows.push_back(std::move(row));
            continue;
        }

        for (long n : cfg.budgets) {
            const auto start = std::chrono::steady_clock::now();
            const int m = resolve_m(cfg.m_policy, d);
            const auto trial_fn = [&, d, n, m](int trial) -> detail::TrialOutcome {
                RngStream ens_rng =
                    detail::trial_stream(cfg, d, n, trial, detail::kSaltEnsemble);
                RngStream run_rng = detail::trial_stream(cfg, d, n, trial, detail::kSaltRun);
                if (cfg.experiment == Experiment::LowerboundSweep) {
                    const UnitaryMatrix u = sample_haar_unitary(d, ens_rng);
                    const PrqsiInstance inst = build_prqsi_states(cfg.purities, d, u);
                    const TwoOutcomePovm povm = cfg.povm.build(d);
                    const BanditTrialResult res =
                        fixed_povm_bandit_run(inst, povm, n, cfg.allocator, run_rng);
                    return {res.selected == inst.best_index(), res.copies_consumed};
                }
                StateEnsemble fresh;
                const StateEnsemble& ens =
                    file_ensemble
                        ? file_ens.front()
                        : (fresh = make_ensemble(cfg.purities, d, cfg.rotation, ens_rng));
                RunTranscript t;
                switch (cfg.experiment) {
                    case Experiment::ImSweep:
                        t = run_im_pqsi(ens, n, m, run_rng, cfg.strict_budget);
                        break;
                    case Experiment::CmSweep:
                        t = run_cm_pqsi(ens, n, run_rng, cfg.strict_budget);
                        break;
                    case Experiment::BaselineSweep:
                        t = run_uniform_baseline(ens, n, cfg.baseline_mode, m, run_rng);
                        break;
                    default:
                        throw std::logic_error("run_sweep: unexpected experiment");
                }
                return {t.selected == ens.best_index, t.copies_consumed};
            };
            const auto outcomes = detail::run_trials(cfg.trials_per_cell, cfg.workers, trial_fn);

            const std::vector<double>& purities =
                file_ensemble ? file_ens.front().purities : cfg.purities;
            const int row_m = (cfg.experiment == Experiment::ImSweep ||
                               (cfg.experiment == Experiment::BaselineSweep &&
                                cfg.baseline_mode == Mode::IM))
                                  ? m
                                  : 0;
            SweepRow row = detail::finish_identification_row(cfg, d, n, row_m, purities, outcomes);
            const auto stop = std::chrono::steady_clock::now();
            row.wallclock_ms = std::chrono::duration<double, std::milli>(stop - start).count();
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

inline std::string to_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "# schema_version=1\n";
    out << "experiment,d,K,N,m,trials,successes,empirical_error,wilson_low,wilson_high,"
           "theory_value,theory_kind,mean_copies,seed\n";
    for (const auto& row : result.rows) {
        out << row.experiment << ',' << row.d << ',' << row.k << ',' << row.n << ',' << row.m
            << ',' << row.trials << ',' << row.successes << ','
            << detail::format_double(row.empirical_error) << ','
            << detail::format_double(row.wilson_low) << ','
            << detail::format_double(row.wilson_high) << ','
            << detail::format_double(row.theory_value) << ',' << row.theory_kind << ','
            << detail::format_double(row.mean_copies) << ',' << row.seed << '\n';
    }
    return out.str();
}

inline std::string timing_sidecar(const SweepResult& result) {
    std::ostringstream out;
    out << "row,experiment,d,N,wallclock_ms\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& row = result.rows[i];
        out << i << ',' << row.experiment << ',' << row.d << ',' << row.n << ','
            << detail::format_double(row.wallclock_ms) << '\n';
    }
    return out.str();
}

inline void write_outputs(const SweepResult& result, const std::string& path) {
    std::ofstream csv(path, std::ios::trunc);
    if (!csv) throw std::runtime_error("write_outputs: cannot open '" + path + "'");
    csv << to_csv(result);
    std::ofstream timing(path + ".timing", std::ios::trunc);
    if (!timing) throw std::runtime_error("write_outputs: cannot open '" + path + ".timing'");
    timing << timing_sidecar(result);
}

}  // namespace pqsi
