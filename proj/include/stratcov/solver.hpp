#pragma once

#include <vector>

#include "stratcov/graph.hpp"
#include "stratcov/prox.hpp"

namespace stratcov {

struct FitConfig {
    double omega = 0.1;      // prox penalty parameter
    double eps_abs = 1e-3;   // absolute stopping tolerance
    double eps_rel = 1e-3;   // relative stopping tolerance
    int max_iter = 1000;
    double cg_tol = 1e-10;   // relative residual for the Laplacian systems
    int cg_max_iter = 0;     // <= 0 selects 10*K
    double eps_pd = 1e-6;    // eigenvalue floor for degenerate strata
    int threads = 0;         // <= 0 selects the OpenMP default

    void validate() const;
};

/// The five ADMM iterates. All collections share K and n.
struct AdmmState {
    std::vector<SymMatrix> theta, theta_tilde, theta_hat;
    std::vector<SymMatrix> U, U_tilde;
    int iter = 0;
};

struct Diagnostics {
    std::vector<double> r_norm, s_norm, eps_pri, eps_dual, objective;
    bool converged = false;
    int iterations = 0;
    double wall_time_sec = 0.0;
};

struct FitResult {
    std::vector<SymMatrix> theta;  // the consensus iterate, symmetrized
    Diagnostics diag;
};

/// ADMM for the Laplacian-regularized joint covariance estimate. Per
/// iteration: loss prox on each stratum, local-regularizer prox on each
/// stratum, one batch of regularized Laplacian solves (one column per unique
/// matrix entry, warm-started from the previous consensus iterate), then the
/// two dual updates. Stops when both residual norms clear the mixed
/// absolute/relative tolerances; returns the best iterate with
/// converged=false when the cap is hit instead.
///
/// `init` overrides the all-zero start; `final_state` receives the iterates
/// at exit when non-null.
FitResult fit_admm(const std::vector<StratumStats>& stats, const SparseLaplacian& L,
                   const LocalRegularizer& reg, const FitConfig& config,
                   const AdmmState* init = nullptr, AdmmState* final_state = nullptr);

/// Full objective: sum_k [ n_k (Tr(S_k theta_k) - log det theta_k) + r(theta_k) ]
/// plus the Laplacian penalty evaluated through the sparse matrix.
/// Throws NotPositiveDefinite when some theta_k is not PD.
double objective(const std::vector<SymMatrix>& theta, const std::vector<StratumStats>& stats,
                 const SparseLaplacian& L, const LocalRegularizer& reg);

/// Laplacian penalty via the edge list: (1/2) sum_edges w ||theta_i - theta_j||_F^2.
double laplacian_penalty(const std::vector<SymMatrix>& theta, const RegGraph& graph);

/// Same quantity via the sparse Laplacian: (1/2) sum_ij L_ij <theta_i, theta_j>.
double laplacian_penalty(const std::vector<SymMatrix>& theta, const SparseLaplacian& L);

}  // namespace stratcov
