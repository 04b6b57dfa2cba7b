#pragma once

#include <span>
#include <vector>

namespace stratcov {

/// Dense row-major matrix. No shape invariants beyond rows*cols storage.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    static Matrix identity(int n);

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

/// Dense symmetric matrix. Entries satisfy a(i,j) == a(j,i) exactly: every
/// construction path symmetrizes, and mutation goes through set() which
/// writes both mirror entries.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n);

    /// Builds (M + M^T)/2 from a dense row-major buffer of n*n values.
    SymMatrix(int n, std::span<const double> dense);

    static SymMatrix identity(int n);
    static SymMatrix diag(std::span<const double> d);

    int dim() const { return n_; }
    bool empty() const { return n_ == 0; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i) * n_ + j] = v;
        a_[static_cast<std::size_t>(j) * n_ + i] = v;
    }

    std::span<const double> data() const { return a_; }

    /// Raw mutable storage. Callers must keep the buffer exactly symmetric
    /// (elementwise combinations of symmetric matrices qualify).
    std::span<double> raw() { return a_; }

private:
    int n_ = 0;
    std::vector<double> a_;
};

struct EigenPair {
    Matrix Q;               // columns are eigenvectors
    std::vector<double> d;  // eigenvalues, ascending
};

/// Eigendecomposition by cyclic Jacobi rotations. Deterministic; eigenvalues
/// ascending. Converges for every symmetric input.
EigenPair sym_eig(const SymMatrix& A);

/// Smallest eigenvalue, i.e. sym_eig(A).d.front().
double min_eig(const SymMatrix& A);

/// Solves A X = B for symmetric positive definite A via Cholesky.
/// Throws NotPositiveDefinite if a factorization pivot is <= 0.
Matrix spd_solve(const SymMatrix& A, const Matrix& B);
std::vector<double> spd_solve(const SymMatrix& A, std::span<const double> b);

/// Cholesky factor L (lower triangular, row-major) with A = L L^T.
Matrix cholesky(const SymMatrix& A);

/// log det A for SPD A, via Cholesky.
double spd_logdet(const SymMatrix& A);

SymMatrix spd_inverse(const SymMatrix& A);

/// Q diag(d) Q^T, symmetrized.
SymMatrix sym_from_eig(const Matrix& Q, std::span<const double> d);

/// Replaces eigenvalues below `floor` by `floor`. Returns the input unchanged
/// (cheap Cholesky certificate) when it already clears the floor.
SymMatrix clamp_eigenvalues(const SymMatrix& A, double floor);

double frob_norm(const SymMatrix& A);
double frob_dist(const SymMatrix& A, const SymMatrix& B);
double trace(const SymMatrix& A);
double trace_product(const SymMatrix& A, const SymMatrix& B);  // Tr(A B)

Matrix matmul(const Matrix& A, const Matrix& B);
std::vector<double> matvec(const SymMatrix& A, std::span<const double> x);

}  // namespace stratcov
