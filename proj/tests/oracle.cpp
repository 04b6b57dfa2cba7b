#include "oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stratcov/errors.hpp"

namespace oracle {

using stratcov::SymMatrix;

std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int c = 0; c < n; ++c) {
        int pivot = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[pivot][c])) pivot = r;
        std::swap(A[c], A[pivot]);
        std::swap(b[c], b[pivot]);
        if (A[c][c] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
        for (int r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            if (f == 0.0) continue;
            for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

double det_small(const SymMatrix& A) {
    switch (A.dim()) {
        case 1:
            return A(0, 0);
        case 2:
            return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
        case 3:
            return A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) -
                   A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
                   A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
        default:
            throw std::runtime_error("det_small supports n <= 3");
    }
}

bool is_pd_small(const SymMatrix& A) {
    const int n = A.dim();
    if (A(0, 0) <= 0.0) return false;
    if (n >= 2) {
        SymMatrix m2(2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j <= i; ++j) m2.set(i, j, A(i, j));
        if (det_small(m2) <= 0.0) return false;
    }
    if (n >= 3 && det_small(A) <= 0.0) return false;
    return true;
}

namespace {

double reg_value(const stratcov::LocalRegularizer& reg, const SymMatrix& th) {
    using Kind = stratcov::LocalRegularizer::Kind;
    switch (reg.kind) {
        case Kind::none:
            return 0.0;
        case Kind::trace: {
            double tr = 0.0;
            for (int i = 0; i < th.dim(); ++i) tr += th(i, i);
            return reg.gamma1 * tr;
        }
        case Kind::frobenius: {
            double s = 0.0;
            for (double v : th.data()) s += v * v;
            return 0.5 * reg.gamma1 * s;
        }
        default:
            throw std::runtime_error("oracle supports smooth regularizers only");
    }
}

}  // namespace

namespace {

// Extended precision keeps the Armijo descent test measurable near the
// optimum, where double-rounded objective differences vanish.
long double objective_ld(const OracleInstance& inst, const std::vector<SymMatrix>& theta) {
    long double total = 0.0L;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const SymMatrix& th = theta[k];
        if (!is_pd_small(th)) return std::numeric_limits<long double>::infinity();
        if (inst.stats[k].count > 0) {
            long double tr = 0.0L;
            const auto a = inst.stats[k].cov.data();
            const auto b = th.data();
            for (std::size_t i = 0; i < a.size(); ++i)
                tr += static_cast<long double>(a[i]) * b[i];
            total += static_cast<long double>(inst.stats[k].count) *
                     (tr - std::log(static_cast<long double>(det_small(th))));
        }
        total += static_cast<long double>(reg_value(inst.reg, th));
    }
    for (const auto& e : inst.graph.edges) {
        long double d2 = 0.0L;
        const auto a = theta[e.i].data();
        const auto b = theta[e.j].data();
        for (std::size_t i = 0; i < a.size(); ++i) {
            const long double d = static_cast<long double>(a[i]) - b[i];
            d2 += d * d;
        }
        total += 0.5L * e.w * d2;
    }
    return total;
}

}  // namespace

double objective_reference(const OracleInstance& inst, const std::vector<SymMatrix>& theta) {
    return static_cast<double>(objective_ld(inst, theta));
}

namespace {

SymMatrix inverse_small(const SymMatrix& A) {
    const int n = A.dim();
    const double det = det_small(A);
    SymMatrix inv(n);
    if (n == 1) {
        inv.set(0, 0, 1.0 / det);
    } else if (n == 2) {
        inv.set(0, 0, A(1, 1) / det);
        inv.set(1, 1, A(0, 0) / det);
        inv.set(1, 0, -A(0, 1) / det);
    } else {
        // Adjugate of a symmetric 3x3.
        inv.set(0, 0, (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) / det);
        inv.set(1, 1, (A(0, 0) * A(2, 2) - A(0, 2) * A(2, 0)) / det);
        inv.set(2, 2, (A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0)) / det);
        inv.set(1, 0, (A(0, 2) * A(2, 1) - A(0, 1) * A(2, 2)) / det);
        inv.set(2, 0, (A(0, 1) * A(1, 2) - A(0, 2) * A(1, 1)) / det);
        inv.set(2, 1, (A(0, 2) * A(1, 0) - A(0, 0) * A(1, 2)) / det);
    }
    return inv;
}

}  // namespace

std::vector<SymMatrix> gradient_reference(const OracleInstance& inst,
                                          const std::vector<SymMatrix>& theta) {
    using Kind = stratcov::LocalRegularizer::Kind;
    const int K = static_cast<int>(theta.size());
    const int n = theta[0].dim();
    std::vector<SymMatrix> grad(K, SymMatrix(n));
    for (int k = 0; k < K; ++k) {
        auto g = grad[k].raw();
        if (inst.stats[k].count > 0) {
            const SymMatrix inv = inverse_small(theta[k]);
            const auto s = inst.stats[k].cov.data();
            const auto iv = inv.data();
            const double nk = static_cast<double>(inst.stats[k].count);
            for (std::size_t e = 0; e < g.size(); ++e) g[e] += nk * (s[e] - iv[e]);
        }
        if (inst.reg.kind == Kind::trace) {
            for (int i = 0; i < n; ++i)
                g[static_cast<std::size_t>(i) * n + i] += inst.reg.gamma1;
        } else if (inst.reg.kind == Kind::frobenius) {
            const auto t = theta[k].data();
            for (std::size_t e = 0; e < g.size(); ++e) g[e] += inst.reg.gamma1 * t[e];
        }
    }
    for (const auto& e : inst.graph.edges) {
        auto gi = grad[e.i].raw();
        auto gj = grad[e.j].raw();
        const auto a = theta[e.i].data();
        const auto b = theta[e.j].data();
        for (std::size_t q = 0; q < a.size(); ++q) {
            const double d = e.w * (a[q] - b[q]);
            gi[q] += d;
            gj[q] -= d;
        }
    }
    return grad;
}

namespace {

double stacked_grad_norm(const std::vector<SymMatrix>& grad) {
    long double gn2 = 0.0L;
    for (const auto& g : grad)
        for (double v : g.data()) gn2 += static_cast<long double>(v) * v;
    return std::sqrt(static_cast<double>(gn2));
}

// Damped Newton on the stacked lower-triangle coordinates, guarded by
// gradient-norm decrease instead of objective comparisons, which stay
// measurable well below the rounding floor of f. Only used to polish the
// gradient descent iterate once f-based line searches flatline.
std::vector<SymMatrix> newton_polish(const OracleInstance& inst, std::vector<SymMatrix> theta,
                                     double tol) {
    using Kind = stratcov::LocalRegularizer::Kind;
    const int K = static_cast<int>(theta.size());
    const int n = theta[0].dim();
    const int p = n * (n + 1) / 2;
    const int dim = K * p;

    std::vector<std::pair<int, int>> pairs;  // (i, j), i >= j, tri order
    pairs.reserve(p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) pairs.emplace_back(i, j);

    // Dense Laplacian of the instance graph.
    std::vector<std::vector<double>> lap(K, std::vector<double>(K, 0.0));
    for (const auto& e : inst.graph.edges) {
        lap[e.i][e.i] += e.w;
        lap[e.j][e.j] += e.w;
        lap[e.i][e.j] -= e.w;
        lap[e.j][e.i] -= e.w;
    }

    for (int it = 0; it < 200; ++it) {
        const auto grad = gradient_reference(inst, theta);
        const double gn = stacked_grad_norm(grad);
        if (gn <= tol) return theta;

        std::vector<double> g(dim, 0.0);
        for (int k = 0; k < K; ++k)
            for (int c = 0; c < p; ++c) {
                const auto [i, j] = pairs[c];
                g[k * p + c] = (i == j) ? grad[k](i, i) : 2.0 * grad[k](i, j);
            }

        std::vector<std::vector<double>> H(dim, std::vector<double>(dim, 0.0));
        for (int k = 0; k < K; ++k) {
            const double nk = static_cast<double>(inst.stats[k].count);
            SymMatrix A(n);
            if (nk > 0) A = inverse_small(theta[k]);
            for (int c = 0; c < p; ++c) {
                const auto [i1, j1] = pairs[c];
                for (int d = c; d < p; ++d) {
                    const auto [i2, j2] = pairs[d];
                    double h = 0.0;
                    if (nk > 0) {
                        // Tr(A E_c A E_d) with symmetric basis elements.
                        double m_uv, m_vu;
                        if (i1 == j1) {
                            m_uv = A(i2, i1) * A(i1, j2);
                            m_vu = A(j2, i1) * A(i1, i2);
                        } else {
                            m_uv = A(i2, i1) * A(j1, j2) + A(i2, j1) * A(i1, j2);
                            m_vu = A(j2, i1) * A(j1, i2) + A(j2, j1) * A(i1, i2);
                        }
                        h = nk * ((i2 == j2) ? m_uv : m_uv + m_vu);
                    }
                    if (c == d) {
                        const double basis2 = (i1 == j1) ? 1.0 : 2.0;
                        if (inst.reg.kind == Kind::frobenius) h += inst.reg.gamma1 * basis2;
                        h += lap[k][k] * basis2;
                    }
                    H[k * p + c][k * p + d] = h;
                    H[k * p + d][k * p + c] = h;
                }
            }
        }
        for (int k1 = 0; k1 < K; ++k1)
            for (int k2 = 0; k2 < K; ++k2) {
                if (k1 == k2 || lap[k1][k2] == 0.0) continue;
                for (int c = 0; c < p; ++c) {
                    const double basis2 = (pairs[c].first == pairs[c].second) ? 1.0 : 2.0;
                    H[k1 * p + c][k2 * p + c] += lap[k1][k2] * basis2;
                }
            }

        std::vector<double> rhs(dim);
        for (int c = 0; c < dim; ++c) rhs[c] = -g[c];
        const std::vector<double> delta = dense_solve(H, rhs);

        double t = 1.0;
        while (true) {
            std::vector<SymMatrix> trial = theta;
            for (int k = 0; k < K; ++k)
                for (int c = 0; c < p; ++c) {
                    const auto [i, j] = pairs[c];
                    trial[k].set(i, j, theta[k](i, j) + t * delta[k * p + c]);
                }
            bool pd = true;
            for (const auto& th : trial) pd = pd && is_pd_small(th);
            if (pd) {
                const double gn_trial = stacked_grad_norm(gradient_reference(inst, trial));
                if (gn_trial <= (1.0 - 1e-4 * t) * gn) {
                    theta.swap(trial);
                    break;
                }
            }
            t *= 0.5;
            if (t < 1e-12)
                throw stratcov::LineSearchFailure("reference_solve: polish step collapsed");
        }
    }
    throw std::runtime_error("reference_solve: polish cap reached");
}

}  // namespace

std::vector<SymMatrix> reference_solve(const OracleInstance& inst, double tol, int max_iter) {
    const int K = static_cast<int>(inst.stats.size());
    int n = 0;
    for (const auto& st : inst.stats) n = std::max(n, st.cov.dim());
    std::vector<SymMatrix> theta(K, SymMatrix::identity(n));
    long double f = objective_ld(inst, theta);
    double step = 1.0;

    // f-based backtracking is reliable down to about 1e-5 on O(1) objectives;
    // below that, rounding makes descent unmeasurable and the polish phase
    // takes over.
    const double gd_target = std::max(tol, 1e-5);
    for (int it = 0; it < max_iter; ++it) {
        const auto grad = gradient_reference(inst, theta);
        long double gn2 = 0.0L;
        for (const auto& g : grad)
            for (double v : g.data()) gn2 += static_cast<long double>(v) * v;
        if (std::sqrt(static_cast<double>(gn2)) <= gd_target) break;

        double t = std::min(step * 2.0, 1.0);
        std::vector<SymMatrix> trial = theta;
        bool stalled = false;
        while (true) {
            for (int k = 0; k < K; ++k) {
                auto dst = trial[k].raw();
                const auto src = theta[k].data();
                const auto g = grad[k].data();
                for (std::size_t e = 0; e < dst.size(); ++e) dst[e] = src[e] - t * g[e];
            }
            const long double f_trial = objective_ld(inst, trial);
            if (f_trial <= f - 1e-4L * t * gn2) {
                f = f_trial;
                break;
            }
            t *= 0.5;
            if (t < 1e-13) {
                stalled = true;
                break;
            }
        }
        if (stalled) break;
        step = t;
        theta.swap(trial);
    }
    if (stacked_grad_norm(gradient_reference(inst, theta)) <= tol) return theta;
    return newton_polish(inst, std::move(theta), tol);
}

double prox_oracle_1d(double v, double s, long n_k, double omega) {
    const double c = omega * static_cast<double>(n_k);
    const auto g = [&](double x) { return c * (s - 1.0 / x) + x - v; };
    double lo = 1e-300;
    double hi = std::max({1.0, v, std::abs(s) * c}) + c + 1.0;
    while (g(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-16 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double auc_bruteforce(std::span<const double> scores, std::span<const char> labels) {
    long pairs = 0;
    double wins = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    if (pairs == 0) throw stratcov::SingleClass("auc_bruteforce needs both classes");
    return wins / static_cast<double>(pairs);
}

double fd_directional(const OracleInstance& inst, const std::vector<SymMatrix>& theta, int k,
                      int i, int j, double h) {
    std::vector<SymMatrix> plus = theta;
    std::vector<SymMatrix> minus = theta;
    // set() moves both mirror entries, so the direction is symmetric.
    plus[k].set(i, j, theta[k](i, j) + h);
    minus[k].set(i, j, theta[k](i, j) - h);
    return (objective_reference(inst, plus) - objective_reference(inst, minus)) / (2.0 * h);
}

}  // namespace oracle
