#pragma once

#include <span>
#include <string>
#include <vector>

#include "stratcov/data.hpp"
#include "stratcov/solver.hpp"

namespace stratcov {

inline constexpr const char* kModelSchemaVersion = "strat-cov/1";

struct FitMeta {
    int iterations = 0;
    bool converged = false;
    double r_norm = 0.0;
    double s_norm = 0.0;
    double objective = 0.0;
    double omega = 0.0;
    double eps_abs = 0.0;
    double eps_rel = 0.0;
    int clamped_strata = 0;  // strata whose final iterate needed an eigenvalue floor
};

/// Fitted stratified Gaussian model; theta[k] is the natural parameter
/// (precision matrix) of stratum k.
struct StratModel {
    int K = 0;
    int n = 0;
    std::vector<SymMatrix> theta;
    std::string graph_desc;
    int graph_edges = 0;
    LocalRegularizer reg;
    FitMeta meta;
};

/// Per-stratum counts and empirical covariances S_k = (1/n_k) sum y y^T,
/// with S_k = 0 for empty strata. Output has ds.K entries.
std::vector<StratumStats> sufficient_stats(const StratDataset& ds);

/// Pools every record into a single stratum (the unstratified baseline).
StratDataset collapse_to_common(const StratDataset& ds);

StratModel fit(const StratDataset& ds, const RegGraph& graph, const LocalRegularizer& reg,
               const FitConfig& config, Diagnostics* diag_out = nullptr);

/// (1/m) sum_k n_k (Tr(S_k theta_k) - log det theta_k) on the dataset's own
/// statistics. Throws EmptyDataset when m = 0.
double average_loss(const StratModel& model, const StratDataset& ds);

/// (1/(K n)) sum_k (Tr(Sigma*_k theta_k) - log det theta_k).
double d_metric(const StratModel& model, const std::vector<SymMatrix>& true_cov);

struct Forecast {
    std::vector<int> predicted_idx;  // complement of the observed set, ascending
    std::vector<double> mean;
    SymMatrix cov;
};

/// Conditional distribution of the unobserved block given observations on a
/// nonempty proper subset of indices: mean -theta_BB^{-1} theta_BA y_obs and
/// covariance theta_BB^{-1}.
Forecast conditional_forecast(const StratModel& model, int z, std::span<const int> observed_idx,
                              std::span<const double> y_obs);

/// Mean squared prediction error of forecasting entries [observe_prefix, n)
/// from entries [0, observe_prefix), averaged over all predicted entries of
/// all records; returns the root.
double forecast_rmse(const StratModel& model, const StratDataset& ds, int observe_prefix);

struct HyperPoint {
    LocalRegularizer reg;
    RegGraph graph;
    std::string label;
};

struct GridResult {
    int best_index = -1;
    StratModel model;                // refit of the best point
    std::vector<double> val_losses;  // one per grid point, in grid order
};

/// Fits each grid point on train, scores average validation loss, returns
/// the argmin (ties broken by grid order).
GridResult grid_search(const StratDataset& train, const StratDataset& val,
                       std::span<const HyperPoint> grid, const FitConfig& config);

// --- serialization (schema "strat-cov/1") ---

/// content: "precision" for fitted models, "covariance" for ground-truth
/// covariance collections stored in the same schema.
std::string model_to_json(const StratModel& model, const std::string& content = "precision");
StratModel model_from_json(const std::string& text);
void save_model(const std::string& path, const StratModel& model,
                const std::string& content = "precision");
StratModel load_model(const std::string& path, std::string* content_out = nullptr);

}  // namespace stratcov
