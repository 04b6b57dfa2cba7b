#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stratcov {

/// Weighted regularization graph on K vertices. Edges are stored once with
/// i < j and strictly positive weight; no self-loops, no duplicates.
struct RegGraph {
    struct Edge {
        int i = 0;
        int j = 0;
        double w = 0.0;
    };

    int K = 0;
    std::vector<Edge> edges;

    static RegGraph from_edges(int K, std::vector<Edge> edges);
};

RegGraph path_graph(int K, double w);

/// Cycle on K >= 3 vertices; throws DegenerateCycle otherwise.
RegGraph cycle_graph(int K, double w);

/// Cartesian product. Vertex (a, u) of G1 x G2 maps to index a*K2 + u, so
/// edge counts satisfy |E| = K1*|E2| + K2*|E1|.
RegGraph cartesian_product(const RegGraph& g1, const RegGraph& g2);

/// Graph with every edge weight multiplied by s > 0.
RegGraph scale_weights(const RegGraph& g, double s);

/// Builder descriptors: "path:K:w", "cycle:K:w",
/// "product:[path:10:1.0,cycle:10:2.0,...]" (left-associative fold).
RegGraph parse_graph_desc(std::string_view desc);

/// Text format: one edge per line, "i j w", 0-based vertices. Blank lines
/// are skipped. K is one past the largest vertex mentioned unless a larger
/// K is given.
RegGraph load_graph_file(const std::string& path, int K_hint = 0);

/// Row-compressed Laplacian: L_ii = sum_k W_ik, L_ij = -W_ij. Every vertex
/// keeps an explicit diagonal entry, so nnz = K + 2|E|.
struct SparseLaplacian {
    int K = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    int nnz() const { return static_cast<int>(val.size()); }
    double diag(int i) const;
};

SparseLaplacian laplacian(const RegGraph& g);

/// Column-major block of `cols` stacked K-vectors.
struct Block {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Block() = default;
    Block(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double* column(int c) { return a.data() + static_cast<std::size_t>(c) * rows; }
    const double* column(int c) const { return a.data() + static_cast<std::size_t>(c) * rows; }
};

struct CgStats {
    int max_iterations = 0;    // worst column
    long total_iterations = 0;
};

/// Solves (L + (2/omega) I) x = b for every column b of B with Jacobi
/// preconditioned CG, warm-started column-wise from `warm` when given.
/// Per-column arithmetic order is fixed, so results do not depend on the
/// thread count. max_iter <= 0 selects the 10*K default cap.
Block solve_regularized_laplacian(const SparseLaplacian& L, double omega, const Block& B,
                                  const Block* warm = nullptr, double tol = 1e-10,
                                  int max_iter = 0, int threads = 0,
                                  CgStats* stats = nullptr);

}  // namespace stratcov
