// qcore.hpp
// Density matrices, Haar-random unitaries, the depolarized pure-state family,
// state ensembles with their purity gap profile, and a Monte Carlo check of
// the low-order Haar moment identities.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pqsi/matrix.hpp"
#include "pqsi/rng.hpp"

namespace pqsi {

// Hermitian, trace-1, positive semi-definite complex matrix.
class DensityMatrix {
public:
    explicit DensityMatrix(CMatrix mat) : mat_(std::move(mat)) {
        require_hermitian(mat_, "DensityMatrix");
        if (std::abs(mat_.trace() - Complex(1.0, 0.0)) > kTraceTol)
            throw std::invalid_argument("DensityMatrix: trace must be 1 within tolerance");
        if (hermitian_eigenvalues(mat_).minCoeff() < -kPsdTol)
            throw std::invalid_argument("DensityMatrix: matrix is not positive semi-definite");
    }

    const CMatrix& mat() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }

private:
    CMatrix mat_;
};

class UnitaryMatrix {
public:
    explicit UnitaryMatrix(CMatrix mat) : mat_(std::move(mat)) {
        require_square(mat_, "UnitaryMatrix");
        if (unitarity_error(mat_) > kUnitaryTol)
            throw std::invalid_argument("UnitaryMatrix: matrix is not unitary within tolerance");
    }

    static UnitaryMatrix identity(int d) { return UnitaryMatrix(CMatrix::Identity(d, d)); }

    const CMatrix& mat() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }

private:
    CMatrix mat_;
};

// Tr(rho^2) via the squared Frobenius norm, which equals the trace of the
// square for Hermitian matrices.
inline double purity(const DensityMatrix& rho) { return rho.mat().squaredNorm(); }

inline CMatrix sample_ginibre(int d, RngStream& rng) {
    CMatrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            g(i, j) = Complex(rng.next_normal(), rng.next_normal());
    return g;
}

// Haar-random unitary: Ginibre draw, QR factorization, and R-diagonal phase
// correction (Mezzadri construction). Degenerate R diagonals trigger a fresh
// draw.
inline UnitaryMatrix sample_haar_unitary(int d, RngStream& rng) {
    if (d < 2) throw std::invalid_argument("sample_haar_unitary: d must be >= 2");
    for (;;) {
        const CMatrix g = sample_ginibre(d, rng);
        Eigen::HouseholderQR<CMatrix> qr(g);
        CMatrix q = qr.householderQ();
        const CVector r_diag = qr.matrixQR().diagonal();
        bool degenerate = false;
        for (int i = 0; i < d; ++i) {
            const double mag = std::abs(r_diag(i));
            if (mag < 1e-300) {
                degenerate = true;
                break;
            }
            q.col(i) *= std::conj(r_diag(i)) / mag;
        }
        if (!degenerate) return UnitaryMatrix(std::move(q));
    }
}

// Haar-random pure state U|0>, drawn directly as a normalized complex
// Gaussian vector.
inline CVector sample_haar_state(int d, RngStream& rng) {
    for (;;) {
        CVector psi(d);
        for (int i = 0; i < d; ++i) psi(i) = Complex(rng.next_normal(), rng.next_normal());
        const double norm = psi.norm();
        if (norm > 1e-150) return psi / norm;
    }
}

// Inverts z = (1 + (d-1) alpha^2) / d for the mixing weight alpha.
inline double alpha_from_purity(double z, int d) {
    if (d < 2) throw std::invalid_argument("alpha_from_purity: d must be >= 2");
    const double floor_z = 1.0 / d;
    if (z < floor_z - 1e-12 || z > 1.0 + 1e-12)
        throw std::domain_error("alpha_from_purity: purity must lie in [1/d, 1]");
    const double arg = (d * z - 1.0) / (d - 1.0);
    return std::sqrt(std::clamp(arg, 0.0, 1.0));
}

// alpha * U|0><0|U' + (1-alpha)/d * I, with purity (1 + (d-1) alpha^2) / d.
inline DensityMatrix depolarized_state(const UnitaryMatrix& u, double alpha, int d) {
    if (alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("depolarized_state: alpha must lie in [0, 1]");
    if (u.dim() != d) throw std::invalid_argument("depolarized_state: dimension mismatch");
    const CVector col0 = u.mat().col(0);
    CMatrix mat = alpha * (col0 * col0.adjoint());
    mat += CMatrix::Identity(d, d) * ((1.0 - alpha) / d);
    return DensityMatrix(std::move(mat));
}

enum class RotationMode { Shared, Independent };

// The candidate set: states with cached purities and the unique best index.
struct StateEnsemble {
    std::vector<DensityMatrix> states;
    std::vector<double> purities;
    int best_index = 0;
    int dim = 0;

    int k_arms() const { return static_cast<int>(states.size()); }
};

namespace detail {

inline StateEnsemble finalize_ensemble(std::vector<DensityMatrix> states,
                                       std::vector<double> purities) {
    const int k = static_cast<int>(states.size());
    if (k < 2) throw std::invalid_argument("make_ensemble: need at least 2 states");
    const int d = states.front().dim();
    for (const auto& s : states)
        if (s.dim() != d) throw std::invalid_argument("make_ensemble: mixed dimensions");
    for (int i = 0; i < k; ++i) {
        const double recomputed = purity(states[i]);
        if (std::abs(recomputed - purities[i]) > kTraceTol)
            throw std::invalid_argument("make_ensemble: recomputed purity deviates from target");
    }
    std::vector<double> sorted = purities;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    if (sorted[0] - sorted[1] < kTieMargin)
        throw std::invalid_argument("make_ensemble: top-two purity margin below 1e-9 (tie)");
    const int best = static_cast<int>(
        std::max_element(purities.begin(), purities.end()) - purities.begin());
    return StateEnsemble{std::move(states), std::move(purities), best, d};
}

}  // namespace detail

// Builds an ensemble from target purities, rotating each state by a Haar
// unitary (one shared across the set or one per state).
inline StateEnsemble make_ensemble(const std::vector<double>& purities, int d,
                                   RotationMode mode, RngStream& rng) {
    std::vector<DensityMatrix> states;
    states.reserve(purities.size());
    UnitaryMatrix shared = (mode == RotationMode::Shared && !purities.empty())
                               ? sample_haar_unitary(d, rng)
                               : UnitaryMatrix::identity(d);
    for (double z : purities) {
        const double alpha = alpha_from_purity(z, d);
        const UnitaryMatrix& u = (mode == RotationMode::Shared)
                                     ? shared
                                     : (shared = sample_haar_unitary(d, rng));
        states.push_back(depolarized_state(u, alpha, d));
    }
    return detail::finalize_ensemble(std::move(states), purities);
}

// Builds an ensemble from explicit density matrices (e.g. loaded from file).
inline StateEnsemble make_ensemble(std::vector<DensityMatrix> states) {
    std::vector<double> purities;
    purities.reserve(states.size());
    for (const auto& s : states) purities.push_back(purity(s));
    return detail::finalize_ensemble(std::move(states), std::move(purities));
}

struct EnsemblePreset {
    std::vector<double> purities;
    int dim;
    RotationMode rotation;
};

inline EnsemblePreset ensemble_preset(const std::string& name) {
    if (name == "two-arm")
        return EnsemblePreset{{1.0, 0.5}, 2, RotationMode::Shared};
    if (name == "geometric-gaps")
        return EnsemblePreset{{0.95, 0.85, 0.75, 0.55}, 4, RotationMode::Independent};
    throw std::invalid_argument("ensemble_preset: unknown preset '" + name + "'");
}

inline StateEnsemble make_ensemble(const std::string& preset_name, RngStream& rng) {
    const EnsemblePreset p = ensemble_preset(preset_name);
    return make_ensemble(p.purities, p.dim, p.rotation, rng);
}

// logbar(K) = 1/2 + sum_{i=2}^{K} 1/i, the successive-rejects normalizer.
inline double logbar(int k_arms) {
    if (k_arms < 2) throw std::invalid_argument("logbar: K must be >= 2");
    double acc = 0.5;
    for (int i = 2; i <= k_arms; ++i) acc += 1.0 / i;
    return acc;
}

// Sorted purity gaps and the two hardness exponents they induce.
struct GapProfile {
    std::vector<double> deltas_sorted;  // Delta_(2) <= ... <= Delta_(K)
    double h1 = 0.0;                    // min_i Delta_(i) / i
    double h2 = 0.0;                    // min_i Delta_(i)^2 / i
    double logbar_k = 0.0;
};

inline GapProfile gap_profile_from_purities(const std::vector<double>& purities) {
    const int k = static_cast<int>(purities.size());
    if (k < 2) throw std::invalid_argument("gap_profile: need at least 2 purities");
    std::vector<double> sorted = purities;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    GapProfile profile;
    profile.deltas_sorted.reserve(k - 1);
    profile.h1 = std::numeric_limits<double>::infinity();
    profile.h2 = std::numeric_limits<double>::infinity();
    for (int i = 2; i <= k; ++i) {
        const double delta = sorted[0] - sorted[i - 1];
        profile.deltas_sorted.push_back(delta);
        profile.h1 = std::min(profile.h1, delta / i);
        profile.h2 = std::min(profile.h2, delta * delta / i);
    }
    profile.logbar_k = logbar(k);
    return profile;
}

inline GapProfile gap_profile(const StateEnsemble& ens) {
    return gap_profile_from_purities(ens.purities);
}

// Monte Carlo estimates of E<psi|A|psi>, E<psi|A|psi><psi|B|psi> and the
// third-order product against their closed forms over Haar-random |psi>.
struct MomentReport {
    struct Entry {
        double estimate = 0.0;
        double target = 0.0;
        double std_error = 0.0;

        bool within(double n_sigmas) const {
            return std::abs(estimate - target) <= n_sigmas * std_error || std_error == 0.0;
        }
    };
    Entry first, second, third;
};

inline MomentReport verify_haar_moments(const CMatrix& a, const CMatrix& b,
                                        const CMatrix& c, int nsamples, RngStream& rng) {
    require_hermitian(a, "verify_haar_moments(a)");
    require_hermitian(b, "verify_haar_moments(b)");
    require_hermitian(c, "verify_haar_moments(c)");
    if (a.rows() != b.rows() || a.rows() != c.rows())
        throw std::invalid_argument("verify_haar_moments: dimension mismatch");
    if (nsamples < 2) throw std::invalid_argument("verify_haar_moments: nsamples must be >= 2");

    const int d = static_cast<int>(a.rows());
    double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0, s3 = 0, s3sq = 0;
    for (int n = 0; n < nsamples; ++n) {
        const CVector psi = sample_haar_state(d, rng);
        const double va = psi.dot(a * psi).real();
        const double vb = psi.dot(b * psi).real();
        const double vc = psi.dot(c * psi).real();
        const double p2 = va * vb;
        const double p3 = va * vb * vc;
        s1 += va;
        s1sq += va * va;
        s2 += p2;
        s2sq += p2 * p2;
        s3 += p3;
        s3sq += p3 * p3;
    }

    const auto entry = [nsamples](double sum, double sumsq, double target) {
        MomentReport::Entry e;
        e.estimate = sum / nsamples;
        const double var = std::max(0.0, sumsq / nsamples - e.estimate * e.estimate);
        e.std_error = std::sqrt(var / nsamples);
        e.target = target;
        return e;
    };

    const double tr_a = a.trace().real();
    const double tr_b = b.trace().real();
    const double tr_c = c.trace().real();
    const double tr_ab = trace_product(a, b).real();
    const double tr_bc = trace_product(b, c).real();
    const double tr_ca = trace_product(c, a).real();
    // Tr(ABC) + Tr(ACB) = 2 Re Tr(ABC) for Hermitian inputs; both 3-cycles of
    // the S3 symmetrization enter the third moment.
    const double tr_3cycles = 2.0 * (a * b * c).trace().real();

    MomentReport report;
    report.first = entry(s1, s1sq, tr_a / d);
    report.second = entry(s2, s2sq, (tr_a * tr_b + tr_ab) / (d * (d + 1.0)));
    report.third = entry(
        s3, s3sq,
        (tr_a * tr_b * tr_c + tr_ab * tr_c + tr_a * tr_bc + tr_ca * tr_b + tr_3cycles) /
            (d * (d + 1.0) * (d + 2.0)));
    return report;
}

}  // namespace pqsi
