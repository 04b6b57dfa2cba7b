#include "stratcov/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "stratcov/errors.hpp"
#include "stratcov/util.hpp"

namespace stratcov {

std::vector<StratumStats> sufficient_stats(const StratDataset& ds) {
    if (ds.K < 1) throw DimensionMismatch("sufficient_stats: dataset has no strata");
    std::vector<StratumStats> stats(ds.K);
    for (auto& st : stats) st.cov = SymMatrix(ds.n);
    for (const auto& rec : ds.records) {
        if (rec.z < 0 || rec.z >= ds.K) throw RangeError("record stratum out of range");
        auto buf = stats[rec.z].cov.raw();
        for (int i = 0; i < ds.n; ++i)
            for (int j = 0; j < ds.n; ++j)
                buf[static_cast<std::size_t>(i) * ds.n + j] += rec.y[i] * rec.y[j];
        ++stats[rec.z].count;
    }
    for (auto& st : stats)
        if (st.count > 0) {
            auto buf = st.cov.raw();
            const double inv = 1.0 / static_cast<double>(st.count);
            for (double& v : buf) v *= inv;
        }
    return stats;
}

StratDataset collapse_to_common(const StratDataset& ds) {
    StratDataset out = ds;
    out.K = 1;
    for (auto& rec : out.records) rec.z = 0;
    return out;
}

StratModel fit(const StratDataset& ds, const RegGraph& graph, const LocalRegularizer& reg,
               const FitConfig& config, Diagnostics* diag_out) {
    if (graph.K != ds.K) throw DimensionMismatch("fit: graph and dataset stratum counts differ");
    const auto stats = sufficient_stats(ds);
    const SparseLaplacian L = laplacian(graph);
    FitResult res = fit_admm(stats, L, reg, config);

    StratModel model;
    model.K = ds.K;
    model.n = ds.n;
    model.theta = std::move(res.theta);
    model.graph_edges = static_cast<int>(graph.edges.size());
    model.reg = reg;
    model.meta.iterations = res.diag.iterations;
    model.meta.converged = res.diag.converged;
    if (!res.diag.r_norm.empty()) {
        model.meta.r_norm = res.diag.r_norm.back();
        model.meta.s_norm = res.diag.s_norm.back();
        model.meta.objective = res.diag.objective.back();
    }
    model.meta.omega = config.omega;
    model.meta.eps_abs = config.eps_abs;
    model.meta.eps_rel = config.eps_rel;

    // The consensus iterate can sit marginally outside the PD cone at loose
    // tolerances; floor the offending strata.
    for (auto& th : model.theta) {
        SymMatrix fixed = clamp_eigenvalues(th, config.eps_pd);
        const auto a = fixed.data();
        const auto b = th.data();
        if (!std::equal(a.begin(), a.end(), b.begin())) {
            ++model.meta.clamped_strata;
            th = std::move(fixed);
        }
    }
    if (diag_out) *diag_out = std::move(res.diag);
    return model;
}

double average_loss(const StratModel& model, const StratDataset& ds) {
    if (ds.m() == 0) throw EmptyDataset("average_loss on empty dataset");
    if (ds.n != model.n) throw DimensionMismatch("average_loss: dimension mismatch");
    if (ds.K != model.K) throw DimensionMismatch("average_loss: stratum count mismatch");
    const auto stats = sufficient_stats(ds);
    double s = 0.0;
    for (int k = 0; k < model.K; ++k) {
        if (stats[k].count == 0) continue;
        s += static_cast<double>(stats[k].count) *
             (trace_product(stats[k].cov, model.theta[k]) - spd_logdet(model.theta[k]));
    }
    return s / static_cast<double>(ds.m());
}

double d_metric(const StratModel& model, const std::vector<SymMatrix>& true_cov) {
    if (static_cast<int>(true_cov.size()) != model.K)
        throw DimensionMismatch("d_metric: stratum count mismatch");
    double s = 0.0;
    for (int k = 0; k < model.K; ++k) {
        if (true_cov[k].dim() != model.n) throw DimensionMismatch("d_metric: dimension mismatch");
        s += trace_product(true_cov[k], model.theta[k]) - spd_logdet(model.theta[k]);
    }
    return s / (static_cast<double>(model.K) * model.n);
}

Forecast conditional_forecast(const StratModel& model, int z, std::span<const int> observed_idx,
                              std::span<const double> y_obs) {
    if (z < 0 || z >= model.K) throw RangeError("conditional_forecast: stratum out of range");
    if (observed_idx.size() != y_obs.size())
        throw DimensionMismatch("conditional_forecast: index/value count mismatch");
    const int n = model.n;
    if (observed_idx.empty())
        throw RangeError("conditional_forecast: observed set must be nonempty");
    if (static_cast<int>(observed_idx.size()) >= n)
        throw RangeError("conditional_forecast: observed set must be a proper subset");
    std::vector<char> seen(n, 0);
    for (int i : observed_idx) {
        if (i < 0 || i >= n) throw RangeError("conditional_forecast: index out of range");
        if (seen[i]) throw RangeError("conditional_forecast: duplicate index");
        seen[i] = 1;
    }

    Forecast fc;
    for (int i = 0; i < n; ++i)
        if (!seen[i]) fc.predicted_idx.push_back(i);
    const int nb = static_cast<int>(fc.predicted_idx.size());

    const SymMatrix& th = model.theta[z];
    SymMatrix theta_bb(nb);
    for (int a = 0; a < nb; ++a)
        for (int b = 0; b <= a; ++b)
            theta_bb.set(a, b, th(fc.predicted_idx[a], fc.predicted_idx[b]));

    // rhs = theta_BA y_obs
    std::vector<double> rhs(nb, 0.0);
    for (int a = 0; a < nb; ++a)
        for (std::size_t t = 0; t < observed_idx.size(); ++t)
            rhs[a] += th(fc.predicted_idx[a], observed_idx[t]) * y_obs[t];

    std::vector<double> mean = spd_solve(theta_bb, rhs);
    for (double& v : mean) v = -v;
    fc.mean = std::move(mean);
    fc.cov = spd_inverse(theta_bb);
    return fc;
}

double forecast_rmse(const StratModel& model, const StratDataset& ds, int observe_prefix) {
    if (ds.n != model.n) throw DimensionMismatch("forecast_rmse: dimension mismatch");
    if (observe_prefix < 1 || observe_prefix >= ds.n)
        throw RangeError("forecast_rmse: observe_prefix must be in [1, n)");
    if (ds.m() == 0) throw EmptyDataset("forecast_rmse on empty dataset");

    std::vector<int> obs_idx(observe_prefix);
    for (int i = 0; i < observe_prefix; ++i) obs_idx[i] = i;

    // Per-stratum factorization cache: the predicted-block system is shared
    // by all records of the stratum.
    struct StratumSolve {
        Matrix chol;       // Cholesky of theta_BB
        Matrix theta_ba;   // nb x na
    };
    std::map<int, StratumSolve> cache;
    const int nb = ds.n - observe_prefix;

    double sq_sum = 0.0;
    long terms = 0;
    for (const auto& rec : ds.records) {
        const int z = rec.z;
        if (z < 0 || z >= model.K) throw RangeError("forecast_rmse: record stratum out of range");
        auto it = cache.find(z);
        if (it == cache.end()) {
            const SymMatrix& th = model.theta[z];
            SymMatrix theta_bb(nb);
            Matrix theta_ba(nb, observe_prefix);
            for (int a = 0; a < nb; ++a) {
                for (int b = 0; b <= a; ++b)
                    theta_bb.set(a, b, th(observe_prefix + a, observe_prefix + b));
                for (int b = 0; b < observe_prefix; ++b)
                    theta_ba.at(a, b) = th(observe_prefix + a, b);
            }
            it = cache.emplace(z, StratumSolve{cholesky(theta_bb), std::move(theta_ba)}).first;
        }
        const auto& sol = it->second;
        std::vector<double> rhs(nb, 0.0);
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < observe_prefix; ++b) rhs[a] += sol.theta_ba.at(a, b) * rec.y[b];
        // Solve theta_BB x = rhs, prediction is -x.
        for (int i = 0; i < nb; ++i) {
            double s = rhs[i];
            for (int k = 0; k < i; ++k) s -= sol.chol.at(i, k) * rhs[k];
            rhs[i] = s / sol.chol.at(i, i);
        }
        for (int i = nb - 1; i >= 0; --i) {
            double s = rhs[i];
            for (int k = i + 1; k < nb; ++k) s -= sol.chol.at(k, i) * rhs[k];
            rhs[i] = s / sol.chol.at(i, i);
        }
        for (int a = 0; a < nb; ++a) {
            sq_sum += sqr(-rhs[a] - rec.y[observe_prefix + a]);
            ++terms;
        }
    }
    return std::sqrt(sq_sum / static_cast<double>(terms));
}

GridResult grid_search(const StratDataset& train, const StratDataset& val,
                       std::span<const HyperPoint> grid, const FitConfig& config) {
    if (grid.empty()) throw Error("grid_search: empty grid");
    GridResult out;
    out.val_losses.reserve(grid.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        StratModel m = fit(train, grid[g].graph, grid[g].reg, config);
        const double loss = average_loss(m, val);
        out.val_losses.push_back(loss);
        if (loss < best) {
            best = loss;
            out.best_index = static_cast<int>(g);
            out.model = std::move(m);
        }
    }
    return out;
}

// --- serialization ---

std::string model_to_json(const StratModel& model, const std::string& content) {
    nlohmann::json j;
    j["version"] = kModelSchemaVersion;
    j["content"] = content;
    j["K"] = model.K;
    j["n"] = model.n;
    j["graph"] = {{"desc", model.graph_desc}, {"edges", model.graph_edges}};
    j["reg"] = {{"kind", [&] {
                     switch (model.reg.kind) {
                         case LocalRegularizer::Kind::none: return "none";
                         case LocalRegularizer::Kind::trace: return "trace";
                         case LocalRegularizer::Kind::frobenius: return "frobenius";
                         case LocalRegularizer::Kind::l1: return "l1";
                         case LocalRegularizer::Kind::trace_plus_od1: return "trace_plus_od1";
                     }
                     return "none";
                 }()},
                {"gamma1", model.reg.gamma1},
                {"gamma2", model.reg.gamma2}};
    j["fit"] = {{"iterations", model.meta.iterations}, {"converged", model.meta.converged},
                {"r_norm", model.meta.r_norm},         {"s_norm", model.meta.s_norm},
                {"objective", model.meta.objective},   {"omega", model.meta.omega},
                {"eps_abs", model.meta.eps_abs},       {"eps_rel", model.meta.eps_rel},
                {"clamped_strata", model.meta.clamped_strata}};
    nlohmann::json theta = nlohmann::json::array();
    for (const auto& th : model.theta) {
        nlohmann::json rows = nlohmann::json::array();
        for (double v : th.data()) rows.push_back(v);
        theta.push_back(std::move(rows));
    }
    j["theta"] = std::move(theta);
    return j.dump(1);
}

StratModel model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<std::string>() != kModelSchemaVersion)
        throw Error("unsupported model schema version");
    StratModel model;
    model.K = j.at("K").get<int>();
    model.n = j.at("n").get<int>();
    if (j.contains("graph")) {
        model.graph_desc = j["graph"].value("desc", "");
        model.graph_edges = j["graph"].value("edges", 0);
    }
    const auto& reg = j.at("reg");
    const std::string kind = reg.at("kind").get<std::string>();
    const double g1 = reg.value("gamma1", 0.0);
    const double g2 = reg.value("gamma2", 0.0);
    if (kind == "none")
        model.reg = LocalRegularizer::none();
    else if (kind == "trace")
        model.reg = LocalRegularizer::trace(g1);
    else if (kind == "frobenius")
        model.reg = LocalRegularizer::frobenius(g1);
    else if (kind == "l1")
        model.reg = LocalRegularizer::l1(g1);
    else if (kind == "trace_plus_od1")
        model.reg = LocalRegularizer::trace_plus_od1(g1, g2);
    else
        throw Error("unknown regularizer kind '" + kind + "'");
    if (j.contains("fit")) {
        const auto& f = j["fit"];
        model.meta.iterations = f.value("iterations", 0);
        model.meta.converged = f.value("converged", false);
        model.meta.r_norm = f.value("r_norm", 0.0);
        model.meta.s_norm = f.value("s_norm", 0.0);
        model.meta.objective = f.value("objective", 0.0);
        model.meta.omega = f.value("omega", 0.0);
        model.meta.eps_abs = f.value("eps_abs", 0.0);
        model.meta.eps_rel = f.value("eps_rel", 0.0);
        model.meta.clamped_strata = f.value("clamped_strata", 0);
    }
    const auto& theta = j.at("theta");
    if (static_cast<int>(theta.size()) != model.K)
        throw DimensionMismatch("model JSON: theta count != K");
    model.theta.reserve(model.K);
    for (const auto& entry : theta) {
        std::vector<double> buf = entry.get<std::vector<double>>();
        if (buf.size() != static_cast<std::size_t>(model.n) * model.n)
            throw DimensionMismatch("model JSON: theta entry size != n*n");
        model.theta.emplace_back(model.n, buf);
    }
    return model;
}

void save_model(const std::string& path, const StratModel& model, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model: " + path);
    out << model_to_json(model, content) << "\n";
}

StratModel load_model(const std::string& path, std::string* content_out) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (content_out) {
        nlohmann::json j = nlohmann::json::parse(text);
        *content_out = j.value("content", "precision");
    }
    return model_from_json(text);
}

}  // namespace stratcov
