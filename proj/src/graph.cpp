#include "stratcov/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "stratcov/errors.hpp"
#include "stratcov/kernels.hpp"
#include "stratcov/util.hpp"

namespace stratcov {

RegGraph RegGraph::from_edges(int K, std::vector<Edge> edges) {
    if (K < 1) throw GraphError("graph needs at least one vertex");
    std::set<std::pair<int, int>> seen;
    for (auto& e : edges) {
        if (e.i > e.j) std::swap(e.i, e.j);
        if (e.i == e.j) throw GraphError("self-loop rejected");
        if (e.i < 0 || e.j >= K) throw GraphError("edge vertex out of range");
        if (!(e.w > 0.0)) throw GraphError("edge weight must be positive");
        if (!seen.insert({e.i, e.j}).second) throw GraphError("duplicate edge rejected");
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::pair(a.i, a.j) < std::pair(b.i, b.j);
    });
    return RegGraph{K, std::move(edges)};
}

RegGraph path_graph(int K, double w) {
    std::vector<RegGraph::Edge> edges;
    edges.reserve(K > 0 ? K - 1 : 0);
    for (int i = 0; i + 1 < K; ++i) edges.push_back({i, i + 1, w});
    return RegGraph::from_edges(K, std::move(edges));
}

RegGraph cycle_graph(int K, double w) {
    if (K < 3) throw DegenerateCycle("cycle graph needs K >= 3");
    std::vector<RegGraph::Edge> edges;
    edges.reserve(K);
    for (int i = 0; i + 1 < K; ++i) edges.push_back({i, i + 1, w});
    edges.push_back({0, K - 1, w});
    return RegGraph::from_edges(K, std::move(edges));
}

RegGraph cartesian_product(const RegGraph& g1, const RegGraph& g2) {
    const int K = g1.K * g2.K;
    std::vector<RegGraph::Edge> edges;
    edges.reserve(static_cast<std::size_t>(g1.K) * g2.edges.size() +
                  static_cast<std::size_t>(g2.K) * g1.edges.size());
    for (int a = 0; a < g1.K; ++a)
        for (const auto& e : g2.edges)
            edges.push_back({a * g2.K + e.i, a * g2.K + e.j, e.w});
    for (const auto& e : g1.edges)
        for (int u = 0; u < g2.K; ++u)
            edges.push_back({e.i * g2.K + u, e.j * g2.K + u, e.w});
    return RegGraph::from_edges(K, std::move(edges));
}

RegGraph scale_weights(const RegGraph& g, double s) {
    if (!(s > 0.0)) throw GraphError("weight scale must be positive");
    RegGraph out = g;
    for (auto& e : out.edges) e.w *= s;
    return out;
}

namespace {

std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '[') ++depth;
        if (s[i] == ']') --depth;
        if (s[i] == sep && depth == 0) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

double parse_num(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw GraphError("bad number in graph descriptor: '" + std::string(s) + "'");
    return v;
}

int parse_count(std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw GraphError("bad count in graph descriptor: '" + std::string(s) + "'");
    return v;
}

}  // namespace

RegGraph parse_graph_desc(std::string_view desc) {
    while (!desc.empty() && desc.front() == ' ') desc.remove_prefix(1);
    while (!desc.empty() && desc.back() == ' ') desc.remove_suffix(1);
    if (desc.starts_with("product:")) {
        std::string_view body = desc.substr(8);
        if (body.size() < 2 || body.front() != '[' || body.back() != ']')
            throw GraphError("product descriptor needs a [...] factor list");
        body = body.substr(1, body.size() - 2);
        const auto parts = split_top_level(body, ',');
        if (parts.empty()) throw GraphError("product descriptor has no factors");
        std::optional<RegGraph> acc;
        for (const auto& part : parts) {
            RegGraph g = parse_graph_desc(part);
            acc = acc ? cartesian_product(*acc, g) : std::move(g);
        }
        return *acc;
    }
    const auto fields = split_top_level(desc, ':');
    if (fields.size() != 3)
        throw GraphError("graph descriptor must be kind:K:w, got '" + std::string(desc) + "'");
    const int K = parse_count(fields[1]);
    const double w = parse_num(fields[2]);
    if (fields[0] == "path") return path_graph(K, w);
    if (fields[0] == "cycle") return cycle_graph(K, w);
    throw GraphError("unknown graph kind '" + std::string(fields[0]) + "'");
}

RegGraph load_graph_file(const std::string& path, int K_hint) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open graph file: " + path);
    std::vector<RegGraph::Edge> edges;
    int max_vertex = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        int i, j;
        double w;
        if (!(ls >> i)) continue;  // blank line
        if (!(ls >> j >> w)) throw ParseError("graph line needs 'i j w'", line_no);
        if (i < 0 || j < 0) throw ParseError("negative vertex index", line_no);
        edges.push_back({i, j, w});
        max_vertex = std::max({max_vertex, i, j});
    }
    const int K = std::max(K_hint, max_vertex + 1);
    if (K < 1) throw GraphError("graph file has no vertices");
    return RegGraph::from_edges(K, std::move(edges));
}

double SparseLaplacian::diag(int i) const {
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
        if (col[p] == i) return val[p];
    return 0.0;
}

SparseLaplacian laplacian(const RegGraph& g) {
    const int K = g.K;
    std::vector<int> count(K, 1);  // explicit diagonal for every vertex
    for (const auto& e : g.edges) {
        ++count[e.i];
        ++count[e.j];
    }
    SparseLaplacian L;
    L.K = K;
    L.row_ptr.assign(K + 1, 0);
    for (int i = 0; i < K; ++i) L.row_ptr[i + 1] = L.row_ptr[i] + count[i];
    L.col.assign(L.row_ptr[K], 0);
    L.val.assign(L.row_ptr[K], 0.0);

    std::vector<int> cursor(L.row_ptr.begin(), L.row_ptr.end() - 1);
    std::vector<double> deg(K, 0.0);
    // Reserve slot 0 of each row for the diagonal; fill off-diagonals after.
    for (int i = 0; i < K; ++i) cursor[i] = L.row_ptr[i] + 1;
    for (const auto& e : g.edges) {
        deg[e.i] += e.w;
        deg[e.j] += e.w;
        L.col[cursor[e.i]] = e.j;
        L.val[cursor[e.i]++] = -e.w;
        L.col[cursor[e.j]] = e.i;
        L.val[cursor[e.j]++] = -e.w;
    }
    for (int i = 0; i < K; ++i) {
        L.col[L.row_ptr[i]] = i;
        L.val[L.row_ptr[i]] = deg[i];
        // Keep columns sorted within the row for reproducible matvec order.
        const int lo = L.row_ptr[i];
        const int hi = L.row_ptr[i + 1];
        std::vector<std::pair<int, double>> row;
        row.reserve(hi - lo);
        for (int p = lo; p < hi; ++p) row.emplace_back(L.col[p], L.val[p]);
        std::sort(row.begin(), row.end());
        for (int p = lo; p < hi; ++p) {
            L.col[p] = row[p - lo].first;
            L.val[p] = row[p - lo].second;
        }
    }
    return L;
}

Block solve_regularized_laplacian(const SparseLaplacian& L, double omega, const Block& B,
                                  const Block* warm, double tol, int max_iter, int threads,
                                  CgStats* stats) {
    if (!(omega > 0.0)) throw Error("solve_regularized_laplacian: omega must be positive");
    if (B.rows != L.K) throw DimensionMismatch("solve_regularized_laplacian: B rows != K");
    if (warm && (warm->rows != B.rows || warm->cols != B.cols))
        throw DimensionMismatch("solve_regularized_laplacian: warm block shape differs");
    if (max_iter <= 0) max_iter = 10 * L.K;
    Block X(B.rows, B.cols);
    kernels::cg_block_solve(L, 2.0 / omega, B, warm, tol, max_iter, threads, X, stats);
    return X;
}

}  // namespace stratcov
