// measure.hpp
// Measurement layer: rotated-basis outcome distributions, Born-rule
// categorical sampling, SWAP-test outcome sampling, and two-outcome POVMs.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pqsi/qcore.hpp"

namespace pqsi {

// The projective basis {U'|i><i|U}_i induced by a rotation U.
struct RotatedBasis {
    UnitaryMatrix u;

    int dim() const { return u.dim(); }
};

// {M0, M1 = I - M0}. The "light" effect is the one of smaller trace
// (ties resolved to M0).
class TwoOutcomePovm {
public:
    explicit TwoOutcomePovm(CMatrix m0) : m0_(std::move(m0)) {
        require_hermitian(m0_, "TwoOutcomePovm");
        const Eigen::VectorXd eigs = hermitian_eigenvalues(m0_);
        if (eigs.minCoeff() < -kPsdTol || eigs.maxCoeff() > 1.0 + kPsdTol)
            throw std::invalid_argument("TwoOutcomePovm: M0 eigenvalues must lie in [0, 1]");
        trace_m0_ = m0_.trace().real();
    }

    // Rank-r projector onto the first r computational basis vectors.
    static TwoOutcomePovm diagonal_projector(int rank, int d) {
        if (rank < 0 || rank > d) throw std::invalid_argument("diagonal_projector: rank out of range");
        CMatrix m0 = CMatrix::Zero(d, d);
        for (int i = 0; i < rank; ++i) m0(i, i) = 1.0;
        return TwoOutcomePovm(std::move(m0));
    }

    static TwoOutcomePovm half_identity(int d) {
        return TwoOutcomePovm(CMatrix::Identity(d, d) * 0.5);
    }

    const CMatrix& m0() const { return m0_; }
    CMatrix m1() const { return CMatrix::Identity(dim(), dim()) - m0_; }
    int dim() const { return static_cast<int>(m0_.rows()); }

    bool light_is_m0() const { return trace_m0_ <= dim() - trace_m0_; }
    CMatrix light_effect() const { return light_is_m0() ? m0_ : m1(); }
    double light_trace() const { return std::min(trace_m0_, dim() - trace_m0_); }

private:
    CMatrix m0_;
    double trace_m0_ = 0.0;
};

// Probability vector over d outcomes; clamped and renormalized once at
// construction so downstream sampling sees an exact distribution.
class OutcomeDistribution {
public:
    explicit OutcomeDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw std::invalid_argument("OutcomeDistribution: empty vector");
        double sum = 0.0;
        for (double& p : probs_) {
            if (p < -kImagResidualTol || p > 1.0 + kImagResidualTol)
                throw std::invalid_argument("OutcomeDistribution: entry outside [0, 1]");
            p = std::clamp(p, 0.0, 1.0);
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("OutcomeDistribution: probabilities must sum to 1");
        for (double& p : probs_) p /= sum;
    }

    const std::vector<double>& probs() const { return probs_; }
    int size() const { return static_cast<int>(probs_.size()); }

    double sum_squares() const {
        double acc = 0.0;
        for (double p : probs_) acc += p * p;
        return acc;
    }

    double sum_cubes() const {
        double acc = 0.0;
        for (double p : probs_) acc += p * p * p;
        return acc;
    }

private:
    std::vector<double> probs_;
};

// p_i = <i| U rho U' |i>, the diagonal of the rotated state.
inline OutcomeDistribution rotated_basis_distribution(const DensityMatrix& rho,
                                                      const RotatedBasis& basis) {
    if (rho.dim() != basis.dim())
        throw std::invalid_argument("rotated_basis_distribution: dimension mismatch");
    const CMatrix& u = basis.u.mat();
    const CMatrix t = u * rho.mat();
    const CVector diag = (t.cwiseProduct(u.conjugate())).rowwise().sum();
    std::vector<double> probs(rho.dim());
    for (int i = 0; i < rho.dim(); ++i) {
        if (std::abs(diag(i).imag()) > kImagResidualTol)
            throw std::runtime_error("rotated_basis_distribution: imaginary residue too large");
        probs[i] = diag(i).real();
    }
    return OutcomeDistribution(std::move(probs));
}

// m independent categorical draws via inverse CDF.
inline std::vector<int> sample_outcomes(const OutcomeDistribution& dist, int m, RngStream& rng) {
    if (m < 1) throw std::invalid_argument("sample_outcomes: m must be >= 1");
    const auto& probs = dist.probs();
    std::vector<double> cum(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cum.begin());
    cum.back() = 1.0;
    std::vector<int> outcomes(m);
    for (int i = 0; i < m; ++i) {
        const double x = rng.next_double();
        outcomes[i] = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), x) - cum.begin());
    }
    return outcomes;
}

// One SWAP test on two copies of a state of purity z, recoded so 1 means
// "accept" (the ancilla-0 outcome): P(1) = (1 + z) / 2. Larger sample means
// then correspond to larger purity, which is what the elimination rule needs.
// Each call accounts for 2 consumed copies on the caller's side.
inline int swap_test_sample(double z, RngStream& rng) {
    if (z < 0.0 || z > 1.0) throw std::domain_error("swap_test_sample: purity must lie in [0, 1]");
    return rng.next_bernoulli(0.5 * (1.0 + z)) ? 1 : 0;
}

// Tr(M rho) for the POVM's light effect, clamped to [0, 1].
inline double povm_accept_prob(const DensityMatrix& rho, const TwoOutcomePovm& povm) {
    if (rho.dim() != povm.dim())
        throw std::invalid_argument("povm_accept_prob: dimension mismatch");
    const Complex tr = trace_product(povm.light_effect(), rho.mat());
    if (std::abs(tr.imag()) > 1e-10)
        throw std::runtime_error("povm_accept_prob: imaginary residue too large");
    return std::clamp(tr.real(), 0.0, 1.0);
}

}  // namespace pqsi
