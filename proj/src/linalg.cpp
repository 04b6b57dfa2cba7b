#include "stratcov/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stratcov/errors.hpp"
#include "stratcov/util.hpp"

namespace stratcov {

Matrix Matrix::identity(int n) {
    Matrix I(n, n);
    for (int i = 0; i < n; ++i) I.at(i, i) = 1.0;
    return I;
}

SymMatrix::SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
    if (n < 1) throw DimensionMismatch("SymMatrix dimension must be >= 1");
}

SymMatrix::SymMatrix(int n, std::span<const double> dense) : SymMatrix(n) {
    if (dense.size() != static_cast<std::size_t>(n) * n)
        throw DimensionMismatch("SymMatrix: buffer size does not match dimension");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = 0.5 * (dense[static_cast<std::size_t>(i) * n + j] +
                                    dense[static_cast<std::size_t>(j) * n + i]);
            set(i, j, v);
        }
}

SymMatrix SymMatrix::identity(int n) {
    SymMatrix I(n);
    for (int i = 0; i < n; ++i) I.set(i, i, 1.0);
    return I;
}

SymMatrix SymMatrix::diag(std::span<const double> d) {
    SymMatrix D(static_cast<int>(d.size()));
    for (int i = 0; i < D.dim(); ++i) D.set(i, i, d[i]);
    return D;
}

namespace {

// One cyclic Jacobi sweep over the strict upper triangle. Rotations with
// |a_pq| <= skip are not applied. Returns the number of rotations applied.
int jacobi_sweep(int n, std::vector<double>& w, Matrix& Q, double skip) {
    int rotations = 0;
    for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
            const double apq = w[static_cast<std::size_t>(p) * n + q];
            if (std::abs(apq) <= skip) continue;
            ++rotations;
            const double app = w[static_cast<std::size_t>(p) * n + p];
            const double aqq = w[static_cast<std::size_t>(q) * n + q];
            const double tau = (aqq - app) / (2.0 * apq);
            double t;
            if (tau >= 0.0)
                t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
            else
                t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;

            w[static_cast<std::size_t>(p) * n + p] = app - t * apq;
            w[static_cast<std::size_t>(q) * n + q] = aqq + t * apq;
            w[static_cast<std::size_t>(p) * n + q] = 0.0;
            w[static_cast<std::size_t>(q) * n + p] = 0.0;
            for (int i = 0; i < n; ++i) {
                if (i == p || i == q) continue;
                double* wip = &w[static_cast<std::size_t>(i) * n + p];
                double* wiq = &w[static_cast<std::size_t>(i) * n + q];
                const double xp = *wip;
                const double xq = *wiq;
                *wip = c * xp - s * xq;
                *wiq = s * xp + c * xq;
                w[static_cast<std::size_t>(p) * n + i] = *wip;
                w[static_cast<std::size_t>(q) * n + i] = *wiq;
            }
            for (int i = 0; i < n; ++i) {
                const double qip = Q.at(i, p);
                const double qiq = Q.at(i, q);
                Q.at(i, p) = c * qip - s * qiq;
                Q.at(i, q) = s * qip + c * qiq;
            }
        }
    }
    return rotations;
}

double off_frob(int n, const std::vector<double>& w) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += sqr(w[static_cast<std::size_t>(i) * n + j]);
    return std::sqrt(2.0 * s);
}

}  // namespace

EigenPair sym_eig(const SymMatrix& A) {
    const int n = A.dim();
    std::vector<double> w(A.data().begin(), A.data().end());
    Matrix Q = Matrix::identity(n);

    const double anorm = frob_norm(A);
    const double tol = 1e-12 * anorm;
    // If every pivot is below skip, the remaining off-diagonal mass is
    // already under tol.
    const double skip = tol / (static_cast<double>(n) * n);

    constexpr int kMaxSweeps = 100;
    if (anorm > 0.0) {
        bool converged = false;
        for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
            if (off_frob(n, w) <= tol) {
                converged = true;
                break;
            }
            if (jacobi_sweep(n, w, Q, skip) == 0) {
                converged = true;
                break;
            }
        }
        if (!converged && off_frob(n, w) > tol)
            throw InternalError("sym_eig: Jacobi sweep cap reached");
    }

    EigenPair ep;
    ep.d.resize(n);
    for (int i = 0; i < n; ++i) ep.d[i] = w[static_cast<std::size_t>(i) * n + i];

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return ep.d[a] < ep.d[b]; });

    EigenPair out;
    out.d.resize(n);
    out.Q = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        out.d[j] = ep.d[perm[j]];
        for (int i = 0; i < n; ++i) out.Q.at(i, j) = Q.at(i, perm[j]);
    }
    return out;
}

double min_eig(const SymMatrix& A) { return sym_eig(A).d.front(); }

Matrix cholesky(const SymMatrix& A) {
    const int n = A.dim();
    Matrix L(n, n);
    for (int j = 0; j < n; ++j) {
        double d = A(j, j);
        for (int k = 0; k < j; ++k) d -= sqr(L.at(j, k));
        if (!(d > 0.0)) throw NotPositiveDefinite("cholesky: pivot <= 0");
        const double ljj = std::sqrt(d);
        L.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = A(i, j);
            for (int k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
            L.at(i, j) = s / ljj;
        }
    }
    return L;
}

namespace {

void chol_solve_inplace(const Matrix& L, std::span<double> x) {
    const int n = L.rows;
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int k = 0; k < i; ++k) s -= L.at(i, k) * x[k];
        x[i] = s / L.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < n; ++k) s -= L.at(k, i) * x[k];
        x[i] = s / L.at(i, i);
    }
}

}  // namespace

Matrix spd_solve(const SymMatrix& A, const Matrix& B) {
    if (A.dim() != B.rows) throw DimensionMismatch("spd_solve: A and B row counts differ");
    const Matrix L = cholesky(A);
    Matrix X = B;
    std::vector<double> col(static_cast<std::size_t>(B.rows));
    for (int j = 0; j < B.cols; ++j) {
        for (int i = 0; i < B.rows; ++i) col[i] = X.at(i, j);
        chol_solve_inplace(L, col);
        for (int i = 0; i < B.rows; ++i) X.at(i, j) = col[i];
    }
    return X;
}

std::vector<double> spd_solve(const SymMatrix& A, std::span<const double> b) {
    if (A.dim() != static_cast<int>(b.size()))
        throw DimensionMismatch("spd_solve: A and b sizes differ");
    const Matrix L = cholesky(A);
    std::vector<double> x(b.begin(), b.end());
    chol_solve_inplace(L, x);
    return x;
}

double spd_logdet(const SymMatrix& A) {
    const Matrix L = cholesky(A);
    double s = 0.0;
    for (int i = 0; i < A.dim(); ++i) s += std::log(L.at(i, i));
    return 2.0 * s;
}

SymMatrix spd_inverse(const SymMatrix& A) {
    const Matrix X = spd_solve(A, Matrix::identity(A.dim()));
    return SymMatrix(A.dim(), X.a);
}

SymMatrix sym_from_eig(const Matrix& Q, std::span<const double> d) {
    const int n = Q.rows;
    // B = Q diag(d), then B Q^T.
    Matrix B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B.at(i, j) = Q.at(i, j) * d[j];
    Matrix C(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += B.at(i, k) * Q.at(j, k);
            C.at(i, j) = s;
        }
    return SymMatrix(n, C.a);
}

SymMatrix clamp_eigenvalues(const SymMatrix& A, double floor) {
    // Fast path: A - floor*I admitting a Cholesky factorization certifies
    // min_eig(A) >= floor, in which case A itself is the answer.
    {
        SymMatrix shifted = A;
        auto buf = shifted.raw();
        for (int i = 0; i < A.dim(); ++i) buf[static_cast<std::size_t>(i) * A.dim() + i] -= floor;
        try {
            (void)cholesky(shifted);
            return A;
        } catch (const NotPositiveDefinite&) {
        }
    }
    EigenPair ep = sym_eig(A);
    for (double& v : ep.d) v = std::max(v, floor);
    return sym_from_eig(ep.Q, ep.d);
}

double frob_norm(const SymMatrix& A) { return std::sqrt(norm2(A.data())); }

double frob_dist(const SymMatrix& A, const SymMatrix& B) {
    double s = 0.0;
    const auto a = A.data();
    const auto b = B.data();
    for (std::size_t i = 0; i < a.size(); ++i) s += sqr(a[i] - b[i]);
    return std::sqrt(s);
}

double trace(const SymMatrix& A) {
    double s = 0.0;
    for (int i = 0; i < A.dim(); ++i) s += A(i, i);
    return s;
}

double trace_product(const SymMatrix& A, const SymMatrix& B) {
    // Tr(A B) = sum_ij A_ij B_ij for symmetric A, B.
    if (A.dim() != B.dim()) throw DimensionMismatch("trace_product: dimensions differ");
    return dot(A.data(), B.data());
}

Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols != B.rows) throw DimensionMismatch("matmul: inner dimensions differ");
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = 0; k < A.cols; ++k) {
            const double aik = A.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
        }
    return C;
}

std::vector<double> matvec(const SymMatrix& A, std::span<const double> x) {
    const int n = A.dim();
    if (static_cast<int>(x.size()) != n) throw DimensionMismatch("matvec: sizes differ");
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += A(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

}  // namespace stratcov
