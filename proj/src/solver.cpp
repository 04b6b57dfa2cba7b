#include "stratcov/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "stratcov/errors.hpp"
#include "stratcov/kernels.hpp"
#include "stratcov/util.hpp"

namespace stratcov {

void FitConfig::validate() const {
    if (!(omega > 0.0)) throw Error("FitConfig: omega must be positive");
    if (!(eps_abs > 0.0 && eps_abs <= 1.0)) throw Error("FitConfig: eps_abs must be in (0, 1]");
    if (!(eps_rel > 0.0 && eps_rel <= 1.0)) throw Error("FitConfig: eps_rel must be in (0, 1]");
    if (max_iter < 1) throw Error("FitConfig: max_iter must be >= 1");
    if (!(cg_tol > 0.0)) throw Error("FitConfig: cg_tol must be positive");
    if (!(eps_pd > 0.0)) throw Error("FitConfig: eps_pd must be positive");
}

namespace {

double stack_norm2(const std::vector<SymMatrix>& a) {
    double s = 0.0;
    for (const auto& m : a) s += norm2(m.data());
    return s;
}

double stack_dist2(const std::vector<SymMatrix>& a, const std::vector<SymMatrix>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto x = a[k].data();
        const auto y = b[k].data();
        for (std::size_t i = 0; i < x.size(); ++i) s += sqr(x[i] - y[i]);
    }
    return s;
}

}  // namespace

double laplacian_penalty(const std::vector<SymMatrix>& theta, const RegGraph& graph) {
    double s = 0.0;
    for (const auto& e : graph.edges) s += e.w * sqr(frob_dist(theta[e.i], theta[e.j]));
    return 0.5 * s;
}

double laplacian_penalty(const std::vector<SymMatrix>& theta, const SparseLaplacian& L) {
    double s = 0.0;
    for (int i = 0; i < L.K; ++i)
        for (int q = L.row_ptr[i]; q < L.row_ptr[i + 1]; ++q)
            s += L.val[q] * trace_product(theta[i], theta[L.col[q]]);
    return 0.5 * s;
}

double objective(const std::vector<SymMatrix>& theta, const std::vector<StratumStats>& stats,
                 const SparseLaplacian& L, const LocalRegularizer& reg) {
    if (theta.size() != stats.size() || static_cast<int>(theta.size()) != L.K)
        throw DimensionMismatch("objective: theta, stats and L sizes differ");
    double s = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (stats[k].count > 0)
            s += static_cast<double>(stats[k].count) *
                 (trace_product(stats[k].cov, theta[k]) - spd_logdet(theta[k]));
        else
            (void)cholesky(theta[k]);  // n_k = 0: loss is the PD indicator
        s += reg.value(theta[k]);
    }
    return s + laplacian_penalty(theta, L);
}

FitResult fit_admm(const std::vector<StratumStats>& stats, const SparseLaplacian& L,
                   const LocalRegularizer& reg, const FitConfig& config, const AdmmState* init,
                   AdmmState* final_state) {
    config.validate();
    const int K = static_cast<int>(stats.size());
    if (K == 0) throw DimensionMismatch("fit_admm: no strata");
    if (L.K != K) throw DimensionMismatch("fit_admm: Laplacian dimension != stratum count");
    int n = 0;
    for (const auto& st : stats)
        if (st.cov.dim() > 0) {
            if (n > 0 && st.cov.dim() != n)
                throw DimensionMismatch("fit_admm: inconsistent stratum dimensions");
            n = st.cov.dim();
        }
    if (n == 0) throw DimensionMismatch("fit_admm: cannot infer dimension from empty stats");

    const auto t_start = std::chrono::steady_clock::now();
    const double omega = config.omega;
    const int p = tri_count(n);
    const int cg_cap = config.cg_max_iter > 0 ? config.cg_max_iter : 10 * K;

    AdmmState st;
    if (init) {
        st = *init;
        if (static_cast<int>(st.theta.size()) != K)
            throw DimensionMismatch("fit_admm: init state has wrong K");
    } else {
        st.theta.assign(K, SymMatrix(n));
        st.theta_tilde.assign(K, SymMatrix(n));
        st.theta_hat.assign(K, SymMatrix(n));
        st.U.assign(K, SymMatrix(n));
        st.U_tilde.assign(K, SymMatrix(n));
    }

    // Packed consensus iterate, reused as the CG warm start.
    Block hat_packed(K, p);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
                hat_packed.column(tri_index(i, j))[k] = st.theta_hat[k](i, j);

    std::vector<SymMatrix> prox_arg(K, SymMatrix(n));
    std::vector<SymMatrix> hat_prev(K, SymMatrix(n));
    Block rhs(K, p);
    Block solved(K, p);

    Diagnostics diag;
    FitResult out;
    int iters_done = 0;

    for (int t = 0; t < config.max_iter; ++t) {
        // Step 1: loss prox at theta_hat - U, per stratum.
        for (int k = 0; k < K; ++k) {
            auto dst = prox_arg[k].raw();
            const auto h = st.theta_hat[k].data();
            const auto u = st.U[k].data();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = h[i] - u[i];
        }
        kernels::prox_loss_batch(prox_arg, stats, omega, config.eps_pd, st.theta,
                                 config.threads);

        // Step 2: local regularizer prox at theta_hat - U_tilde, per stratum.
        for (int k = 0; k < K; ++k) {
            auto dst = prox_arg[k].raw();
            const auto h = st.theta_hat[k].data();
            const auto u = st.U_tilde[k].data();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = h[i] - u[i];
        }
        kernels::prox_local_batch(prox_arg, reg, omega, st.theta_tilde, config.threads);

        // Step 3: Laplacian prox. One regularized system per unique entry
        // (i >= j), right-hand side (1/omega)(theta + U + theta_tilde + U_tilde),
        // mirrored back into the consensus iterate.
        for (int k = 0; k < K; ++k) {
            const auto a = st.theta[k].data();
            const auto b = st.U[k].data();
            const auto c = st.theta_tilde[k].data();
            const auto d = st.U_tilde[k].data();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j <= i; ++j) {
                    const std::size_t e = static_cast<std::size_t>(i) * n + j;
                    rhs.column(tri_index(i, j))[k] = (a[e] + b[e] + c[e] + d[e]) / omega;
                }
        }
        kernels::cg_block_solve(L, 2.0 / omega, rhs, &hat_packed, config.cg_tol, cg_cap,
                                config.threads, solved, nullptr);
        std::swap(hat_packed.a, solved.a);

        hat_prev.swap(st.theta_hat);
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j <= i; ++j)
                    st.theta_hat[k].set(i, j, hat_packed.column(tri_index(i, j))[k]);
        }

        // Step 4: dual updates.
        for (int k = 0; k < K; ++k) {
            auto u = st.U[k].raw();
            auto v = st.U_tilde[k].raw();
            const auto th = st.theta[k].data();
            const auto tt = st.theta_tilde[k].data();
            const auto hh = st.theta_hat[k].data();
            for (std::size_t i = 0; i < u.size(); ++i) {
                u[i] += th[i] - hh[i];
                v[i] += tt[i] - hh[i];
            }
        }
        ++st.iter;
        ++iters_done;

        // Residuals r = (theta - hat, tilde - hat), s = -(1/omega)(d_hat, d_hat).
        const double r_norm =
            std::sqrt(stack_dist2(st.theta, st.theta_hat) + stack_dist2(st.theta_tilde, st.theta_hat));
        const double s_norm = std::sqrt(2.0 * stack_dist2(st.theta_hat, hat_prev)) / omega;

        const double sqrt_dim = std::sqrt(2.0 * K * static_cast<double>(n) * n);
        const double iter_norm =
            std::max(std::sqrt(stack_norm2(st.theta) + stack_norm2(st.theta_tilde)),
                     std::sqrt(2.0 * stack_norm2(st.theta_hat)));
        const double eps_pri = sqrt_dim * config.eps_abs + config.eps_rel * iter_norm;
        const double eps_dual = sqrt_dim * config.eps_abs +
                                (config.eps_rel / omega) *
                                    std::sqrt(stack_norm2(st.U) + stack_norm2(st.U_tilde));

        diag.r_norm.push_back(r_norm);
        diag.s_norm.push_back(s_norm);
        diag.eps_pri.push_back(eps_pri);
        diag.eps_dual.push_back(eps_dual);
        double obj;
        try {
            obj = objective(st.theta, stats, L, reg);
        } catch (const NotPositiveDefinite&) {
            obj = std::numeric_limits<double>::quiet_NaN();
        }
        diag.objective.push_back(obj);

        if (r_norm <= eps_pri && s_norm <= eps_dual) {
            diag.converged = true;
            break;
        }
    }

    diag.iterations = iters_done;
    diag.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    out.theta = st.theta_hat;
    out.diag = std::move(diag);
    if (final_state) *final_state = std::move(st);
    return out;
}

}  // namespace stratcov
