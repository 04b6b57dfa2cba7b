#include <doctest.h>

#include "stratcov/graph.hpp"
#include "stratcov/kernels.hpp"
#include "stratcov/rng.hpp"
#include "test_helpers.hpp"

using namespace stratcov;

// The OpenMP kernels must reproduce the serial reference bit for bit at any
// thread count: work items are independent and each keeps its own arithmetic
// order.

TEST_CASE("prox_loss_batch: parallel equals serial bitwise") {
    Rng rng(1001);
    const int K = 23, n = 6;
    std::vector<SymMatrix> V;
    std::vector<StratumStats> stats;
    for (int k = 0; k < K; ++k) {
        V.push_back(testutil::random_symmetric(n, rng, 2.0));
        StratumStats st;
        st.count = rng.uniform_int(5);  // includes empty strata
        st.cov = st.count > 0 ? testutil::random_spd(n, rng, 0.2) : SymMatrix(n);
        stats.push_back(std::move(st));
    }
    std::vector<SymMatrix> ref(K, SymMatrix(n));
    kernels::serial::prox_loss_batch(V, stats, 0.1, 1e-6, ref);
    for (int threads : {1, 2, 4, 8}) {
        std::vector<SymMatrix> out(K, SymMatrix(n));
        kernels::prox_loss_batch(V, stats, 0.1, 1e-6, out, threads);
        for (int k = 0; k < K; ++k) {
            REQUIRE(out[k].data().size() == ref[k].data().size());
            for (std::size_t i = 0; i < out[k].data().size(); ++i)
                CHECK(out[k].data()[i] == ref[k].data()[i]);
        }
    }
}

TEST_CASE("prox_local_batch: parallel equals serial bitwise") {
    Rng rng(1002);
    const int K = 17, n = 5;
    std::vector<SymMatrix> V;
    for (int k = 0; k < K; ++k) V.push_back(testutil::random_symmetric(n, rng, 2.0));
    const auto reg = LocalRegularizer::trace_plus_od1(0.4, 0.2);
    std::vector<SymMatrix> ref(K, SymMatrix(n));
    kernels::serial::prox_local_batch(V, reg, 0.1, ref);
    for (int threads : {2, 5}) {
        std::vector<SymMatrix> out(K, SymMatrix(n));
        kernels::prox_local_batch(V, reg, 0.1, out, threads);
        for (int k = 0; k < K; ++k)
            for (std::size_t i = 0; i < out[k].data().size(); ++i)
                CHECK(out[k].data()[i] == ref[k].data()[i]);
    }
}

TEST_CASE("cg_block_solve: parallel equals serial bitwise") {
    Rng rng(1003);
    const int K = 40, cols = 21;
    std::vector<RegGraph::Edge> edges;
    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
            if (rng.uniform() < 0.15) edges.push_back({i, j, 0.2 + rng.uniform()});
    const SparseLaplacian L = laplacian(RegGraph::from_edges(K, std::move(edges)));
    Block B(K, cols);
    for (double& v : B.a) v = rng.normal();
    Block warm(K, cols);
    for (double& v : warm.a) v = 0.1 * rng.normal();

    Block ref(K, cols);
    kernels::serial::cg_block_solve(L, 20.0, B, &warm, 1e-10, 10 * K, ref, nullptr);
    for (int threads : {1, 3, 7}) {
        Block out(K, cols);
        kernels::cg_block_solve(L, 20.0, B, &warm, 1e-10, 10 * K, threads, out, nullptr);
        CHECK(out.a == ref.a);
    }
}
