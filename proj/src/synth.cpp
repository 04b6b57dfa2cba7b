#include "stratcov/synth.hpp"

#include <cmath>

#include "stratcov/errors.hpp"
#include "stratcov/rng.hpp"

namespace stratcov {

void CyclicConfig::validate() const {
    if (K < 3) throw Error("CyclicConfig: K must be >= 3");
    if (n < 2) throw Error("CyclicConfig: n must be >= 2");
    if (samples < 1) throw Error("CyclicConfig: samples must be >= 1");
    if (std::abs(rho_base) + std::abs(rho_amp) >= 1.0)
        throw Error("CyclicConfig: |rho| must stay below 1");
    if (!(var_base - std::abs(var_amp) > 0.0))
        throw Error("CyclicConfig: variances must stay positive");
}

std::vector<SymMatrix> cyclic_true_covariances(const CyclicConfig& cfg) {
    cfg.validate();
    std::vector<SymMatrix> truth;
    truth.reserve(cfg.K);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int k = 0; k < cfg.K; ++k) {
        const double phase = kTwoPi * k / cfg.K;
        const double rho = cfg.rho_base + cfg.rho_amp * std::sin(phase);
        const double var = cfg.var_base + cfg.var_amp * std::cos(phase);
        SymMatrix S(cfg.n);
        for (int i = 0; i < cfg.n; ++i)
            for (int j = 0; j <= i; ++j) S.set(i, j, var * std::pow(rho, i - j));
        truth.push_back(std::move(S));
    }
    return truth;
}

StratDataset sample_cyclic_dataset(const std::vector<SymMatrix>& truth, const CyclicConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(truth.size()) != cfg.K)
        throw DimensionMismatch("sample_cyclic_dataset: truth does not match config");
    StratDataset ds;
    ds.n = cfg.n;
    ds.K = cfg.K;
    ds.records.reserve(cfg.samples);

    std::vector<Matrix> chol;
    chol.reserve(cfg.K);
    for (const auto& S : truth) chol.push_back(cholesky(S));

    Rng rng(cfg.seed);
    std::vector<double> zvec(cfg.n);
    for (int s = 0; s < cfg.samples; ++s) {
        const int z = s % cfg.K;
        for (double& v : zvec) v = rng.normal();
        StratDataset::Record rec;
        rec.z = z;
        rec.y.assign(cfg.n, 0.0);
        for (int i = 0; i < cfg.n; ++i) {
            double acc = 0.0;
            for (int j = 0; j <= i; ++j) acc += chol[z].at(i, j) * zvec[j];
            rec.y[i] = acc;
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace stratcov
