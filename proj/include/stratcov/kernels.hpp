#pragma once

#include <span>
#include <vector>

#include "stratcov/prox.hpp"

namespace stratcov {

struct SparseLaplacian;
struct Block;
struct CgStats;

/// Batched hot loops of the fitting path. The OpenMP versions parallelize
/// over independent work items (strata, right-hand-side columns) and keep
/// the arithmetic order inside each item fixed, so output bits do not depend
/// on the thread count. The kernels::serial reference twins run the same
/// per-item code on a plain loop and are kept for tests and benchmarks.
namespace kernels {

int resolve_threads(int threads);

/// out[k] = prox of the scaled log-det loss at V[k].
void prox_loss_batch(std::span<const SymMatrix> V, std::span<const StratumStats> stats,
                     double omega, double eps_pd, std::span<SymMatrix> out, int threads);

/// out[k] = prox of the local regularizer at V[k].
void prox_local_batch(std::span<const SymMatrix> V, const LocalRegularizer& reg, double omega,
                      std::span<SymMatrix> out, int threads);

/// Jacobi-preconditioned CG on (L + shift I) x = b, one column at a time.
void cg_block_solve(const SparseLaplacian& L, double shift, const Block& B, const Block* warm,
                    double tol, int max_iter, int threads, Block& out, CgStats* stats);

namespace serial {

void prox_loss_batch(std::span<const SymMatrix> V, std::span<const StratumStats> stats,
                     double omega, double eps_pd, std::span<SymMatrix> out);

void prox_local_batch(std::span<const SymMatrix> V, const LocalRegularizer& reg, double omega,
                      std::span<SymMatrix> out);

void cg_block_solve(const SparseLaplacian& L, double shift, const Block& B, const Block* warm,
                    double tol, int max_iter, Block& out, CgStats* stats);

}  // namespace serial

}  // namespace kernels
}  // namespace stratcov
