#pragma once

#include <cstdint>
#include <vector>

#include "stratcov/data.hpp"
#include "stratcov/linalg.hpp"

namespace stratcov {

/// Cyclically stratified synthetic family: stratum k has an AR(1)-style
/// Toeplitz covariance whose lag-1 correlation varies smoothly around the
/// cycle, so neighbouring strata are similar but the family is far from
/// constant.
struct CyclicConfig {
    std::uint64_t seed = 7;
    int K = 36;
    int n = 8;
    int samples = 288;
    double rho_base = 0.25;
    double rho_amp = 0.55;   // rho_k = rho_base + rho_amp * sin(2 pi k / K)
    double var_base = 1.0;
    double var_amp = 0.25;   // sigma2_k = var_base + var_amp * cos(2 pi k / K)

    void validate() const;
};

std::vector<SymMatrix> cyclic_true_covariances(const CyclicConfig& cfg);

/// Round-robin stratum assignment, seeded Gaussian draws.
StratDataset sample_cyclic_dataset(const std::vector<SymMatrix>& truth, const CyclicConfig& cfg);

}  // namespace stratcov
