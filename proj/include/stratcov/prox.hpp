#pragma once

#include <string>

#include "stratcov/linalg.hpp"

namespace stratcov {

/// Local regularizer r(theta). Conventions:
///   trace:          gamma1 * Tr(theta)
///   frobenius:      (gamma1/2) * ||theta||_F^2
///   l1:             gamma1 * sum_ij |theta_ij|
///   trace_plus_od1: gamma1 * Tr(theta) + gamma2 * sum_{i != j} |theta_ij|
struct LocalRegularizer {
    enum class Kind { none, trace, frobenius, l1, trace_plus_od1 };

    Kind kind = Kind::none;
    double gamma1 = 0.0;
    double gamma2 = 0.0;

    static LocalRegularizer none() { return {}; }
    static LocalRegularizer trace(double g);
    static LocalRegularizer frobenius(double g);
    static LocalRegularizer l1(double g);
    static LocalRegularizer trace_plus_od1(double g_tr, double g_od);

    bool smooth() const { return kind != Kind::l1 && kind != Kind::trace_plus_od1; }

    /// r(theta), for objective evaluation.
    double value(const SymMatrix& theta) const;

    std::string describe() const;
};

/// Per-stratum sufficient statistics: sample count and empirical covariance
/// (the zero matrix when the stratum is empty).
struct StratumStats {
    long count = 0;
    SymMatrix cov;
};

/// Proximal operator of the scaled Gaussian log-det loss
///   omega * n_k (Tr(S theta) - log det theta).
/// For n_k > 0 the closed form goes through the eigendecomposition of
/// (1/(omega n_k)) V - S. For n_k = 0 the loss degenerates to the indicator
/// of positive definiteness and the result is V with eigenvalues floored at
/// eps_pd.
SymMatrix prox_loss(const SymMatrix& V, const StratumStats& stats, double omega,
                    double eps_pd = 1e-6);

/// Closed-form proximal operator of the local regularizer.
SymMatrix prox_local(const SymMatrix& V, const LocalRegularizer& reg, double omega);

}  // namespace stratcov
