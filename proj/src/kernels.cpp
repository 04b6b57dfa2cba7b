#include "stratcov/kernels.hpp"

#include <cmath>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stratcov/errors.hpp"
#include "stratcov/graph.hpp"
#include "stratcov/util.hpp"

namespace stratcov::kernels {

int resolve_threads(int threads) {
    if (threads > 0) return threads;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

struct CgScratch {
    std::vector<double> r, z, p, Ap;
    explicit CgScratch(int n) : r(n), z(n), p(n), Ap(n) {}
};

inline void apply_shifted(const SparseLaplacian& L, double shift, const double* x, double* y) {
    for (int i = 0; i < L.K; ++i) {
        double s = shift * x[i];
        for (int q = L.row_ptr[i]; q < L.row_ptr[i + 1]; ++q) s += L.val[q] * x[L.col[q]];
        y[i] = s;
    }
}

struct CgColumnResult {
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

// One CG solve of (L + shift I) x = b. x holds the warm start on entry and
// the iterate on exit. precond holds 1 / (diag(L) + shift).
CgColumnResult cg_column(const SparseLaplacian& L, double shift, const double* precond,
                         const double* b, double* x, bool warm, double tol, int cap,
                         CgScratch& s) {
    const int n = L.K;
    const double bnorm = std::sqrt(norm2(std::span<const double>(b, n)));
    if (bnorm == 0.0) {
        std::memset(x, 0, sizeof(double) * n);
        return {0, 0.0, true};
    }
    if (warm) {
        apply_shifted(L, shift, x, s.Ap.data());
        for (int i = 0; i < n; ++i) s.r[i] = b[i] - s.Ap[i];
    } else {
        std::memset(x, 0, sizeof(double) * n);
        std::memcpy(s.r.data(), b, sizeof(double) * n);
    }
    const double stop = tol * bnorm;
    double rnorm = std::sqrt(norm2(s.r));
    if (rnorm <= stop) return {0, rnorm, true};

    for (int i = 0; i < n; ++i) s.z[i] = precond[i] * s.r[i];
    std::memcpy(s.p.data(), s.z.data(), sizeof(double) * n);
    double rz = dot(s.r, s.z);

    for (int it = 1; it <= cap; ++it) {
        apply_shifted(L, shift, s.p.data(), s.Ap.data());
        const double pAp = dot(s.p, s.Ap);
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) x[i] += alpha * s.p[i];
        for (int i = 0; i < n; ++i) s.r[i] -= alpha * s.Ap[i];
        rnorm = std::sqrt(norm2(s.r));
        if (rnorm <= stop) return {it, rnorm, true};
        for (int i = 0; i < n; ++i) s.z[i] = precond[i] * s.r[i];
        const double rz_next = dot(s.r, s.z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) s.p[i] = s.z[i] + beta * s.p[i];
    }
    return {cap, rnorm, false};
}

std::vector<double> jacobi_precond(const SparseLaplacian& L, double shift) {
    std::vector<double> m(L.K);
    for (int i = 0; i < L.K; ++i) m[i] = 1.0 / (L.diag(i) + shift);
    return m;
}

}  // namespace

void cg_block_solve(const SparseLaplacian& L, double shift, const Block& B, const Block* warm,
                    double tol, int max_iter, int threads, Block& out, CgStats* stats) {
    const int cols = B.cols;
    const std::vector<double> precond = jacobi_precond(L, shift);
    std::vector<CgColumnResult> results(cols);
    const int nt = resolve_threads(threads);

#pragma omp parallel num_threads(nt)
    {
        CgScratch scratch(L.K);
#pragma omp for schedule(static)
        for (int c = 0; c < cols; ++c) {
            double* x = out.column(c);
            if (warm) std::memcpy(x, warm->column(c), sizeof(double) * L.K);
            results[c] = cg_column(L, shift, precond.data(), B.column(c), x, warm != nullptr,
                                   tol, max_iter, scratch);
        }
    }

    CgStats agg;
    for (int c = 0; c < cols; ++c) {
        agg.total_iterations += results[c].iterations;
        agg.max_iterations = std::max(agg.max_iterations, results[c].iterations);
        if (!results[c].converged) {
            std::vector<double> best(out.column(c), out.column(c) + L.K);
            throw MaxIterExceeded("CG cap of " + std::to_string(max_iter) +
                                      " iterations reached (column " + std::to_string(c) + ")",
                                  std::move(best), results[c].residual);
        }
    }
    if (stats) *stats = agg;
}

void prox_loss_batch(std::span<const SymMatrix> V, std::span<const StratumStats> stats,
                     double omega, double eps_pd, std::span<SymMatrix> out, int threads) {
    const int K = static_cast<int>(V.size());
    const int nt = resolve_threads(threads);
    std::string error;
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (int k = 0; k < K; ++k) {
        try {
            out[k] = prox_loss(V[k], stats[k], omega, eps_pd);
        } catch (const std::exception& e) {
#pragma omp critical
            error = e.what();
        }
    }
    if (!error.empty()) throw Error("prox_loss_batch: " + error);
}

void prox_local_batch(std::span<const SymMatrix> V, const LocalRegularizer& reg, double omega,
                      std::span<SymMatrix> out, int threads) {
    const int K = static_cast<int>(V.size());
    const int nt = resolve_threads(threads);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int k = 0; k < K; ++k) out[k] = prox_local(V[k], reg, omega);
}

namespace serial {

void cg_block_solve(const SparseLaplacian& L, double shift, const Block& B, const Block* warm,
                    double tol, int max_iter, Block& out, CgStats* stats) {
    const std::vector<double> precond = jacobi_precond(L, shift);
    CgScratch scratch(L.K);
    CgStats agg;
    for (int c = 0; c < B.cols; ++c) {
        double* x = out.column(c);
        if (warm) std::memcpy(x, warm->column(c), sizeof(double) * L.K);
        const CgColumnResult res = cg_column(L, shift, precond.data(), B.column(c), x,
                                             warm != nullptr, tol, max_iter, scratch);
        agg.total_iterations += res.iterations;
        agg.max_iterations = std::max(agg.max_iterations, res.iterations);
        if (!res.converged) {
            std::vector<double> best(x, x + L.K);
            throw MaxIterExceeded("CG cap of " + std::to_string(max_iter) +
                                      " iterations reached (column " + std::to_string(c) + ")",
                                  std::move(best), res.residual);
        }
    }
    if (stats) *stats = agg;
}

void prox_loss_batch(std::span<const SymMatrix> V, std::span<const StratumStats> stats,
                     double omega, double eps_pd, std::span<SymMatrix> out) {
    for (std::size_t k = 0; k < V.size(); ++k)
        out[k] = prox_loss(V[k], stats[k], omega, eps_pd);
}

void prox_local_batch(std::span<const SymMatrix> V, const LocalRegularizer& reg, double omega,
                      std::span<SymMatrix> out) {
    for (std::size_t k = 0; k < V.size(); ++k) out[k] = prox_local(V[k], reg, omega);
}

}  // namespace serial

}  // namespace stratcov::kernels
