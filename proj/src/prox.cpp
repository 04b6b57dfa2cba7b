#include "stratcov/prox.hpp"

#include <cmath>
#include <cstdlib>

#include "stratcov/errors.hpp"
#include "stratcov/util.hpp"

namespace stratcov {

LocalRegularizer LocalRegularizer::trace(double g) {
    if (g < 0.0) throw Error("trace regularizer weight must be >= 0");
    return {Kind::trace, g, 0.0};
}

LocalRegularizer LocalRegularizer::frobenius(double g) {
    if (g < 0.0) throw Error("frobenius regularizer weight must be >= 0");
    return {Kind::frobenius, g, 0.0};
}

LocalRegularizer LocalRegularizer::l1(double g) {
    if (g < 0.0) throw Error("l1 regularizer weight must be >= 0");
    return {Kind::l1, g, 0.0};
}

LocalRegularizer LocalRegularizer::trace_plus_od1(double g_tr, double g_od) {
    if (g_tr < 0.0 || g_od < 0.0) throw Error("regularizer weights must be >= 0");
    return {Kind::trace_plus_od1, g_tr, g_od};
}

double LocalRegularizer::value(const SymMatrix& theta) const {
    switch (kind) {
        case Kind::none:
            return 0.0;
        case Kind::trace:
            return gamma1 * stratcov::trace(theta);
        case Kind::frobenius:
            return 0.5 * gamma1 * norm2(theta.data());
        case Kind::l1: {
            double s = 0.0;
            for (double v : theta.data()) s += std::abs(v);
            return gamma1 * s;
        }
        case Kind::trace_plus_od1: {
            double od = 0.0;
            const int n = theta.dim();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) od += std::abs(theta(i, j));
            return gamma1 * stratcov::trace(theta) + gamma2 * od;
        }
    }
    return 0.0;
}

std::string LocalRegularizer::describe() const {
    switch (kind) {
        case Kind::none:
            return "none";
        case Kind::trace:
            return "trace(" + format_double(gamma1) + ")";
        case Kind::frobenius:
            return "frobenius(" + format_double(gamma1) + ")";
        case Kind::l1:
            return "l1(" + format_double(gamma1) + ")";
        case Kind::trace_plus_od1:
            return "trace_plus_od1(" + format_double(gamma1) + "," + format_double(gamma2) + ")";
    }
    return "?";
}

SymMatrix prox_loss(const SymMatrix& V, const StratumStats& stats, double omega, double eps_pd) {
    if (!(omega > 0.0)) throw Error("prox_loss: omega must be positive");
    if (stats.count == 0) return clamp_eigenvalues(V, eps_pd);
    if (stats.cov.dim() != V.dim()) throw DimensionMismatch("prox_loss: V and S dimensions differ");

    const int n = V.dim();
    const double c = omega * static_cast<double>(stats.count);

    SymMatrix M(n);
    {
        auto buf = M.raw();
        const auto v = V.data();
        const auto s = stats.cov.data();
        for (std::size_t i = 0; i < v.size(); ++i) buf[i] = v[i] / c - s[i];
    }
    EigenPair ep = sym_eig(M);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        const double e = c * ep.d[i];
        // Positive root of x^2 - e x - c = 0, evaluated without cancellation.
        x[i] = e >= 0.0 ? 0.5 * (e + std::sqrt(e * e + 4.0 * c))
                        : 2.0 * c / (std::sqrt(e * e + 4.0 * c) - e);
    }
    return sym_from_eig(ep.Q, x);
}

namespace {

inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

SymMatrix prox_local(const SymMatrix& V, const LocalRegularizer& reg, double omega) {
    if (!(omega > 0.0)) throw Error("prox_local: omega must be positive");
    const int n = V.dim();
    switch (reg.kind) {
        case LocalRegularizer::Kind::none:
            return V;
        case LocalRegularizer::Kind::trace: {
            SymMatrix X = V;
            auto buf = X.raw();
            const double shift = omega * reg.gamma1;
            for (int i = 0; i < n; ++i) buf[static_cast<std::size_t>(i) * n + i] -= shift;
            return X;
        }
        case LocalRegularizer::Kind::frobenius: {
            SymMatrix X = V;
            auto buf = X.raw();
            const double scale = 1.0 / (1.0 + omega * reg.gamma1);
            for (double& v : buf) v *= scale;
            return X;
        }
        case LocalRegularizer::Kind::l1: {
            SymMatrix X = V;
            auto buf = X.raw();
            const double t = omega * reg.gamma1;
            for (double& v : buf) v = soft_threshold(v, t);
            return X;
        }
        case LocalRegularizer::Kind::trace_plus_od1: {
            SymMatrix X = V;
            auto buf = X.raw();
            const double shift = omega * reg.gamma1;
            const double t = omega * reg.gamma2;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    auto& v = buf[static_cast<std::size_t>(i) * n + j];
                    v = (i == j) ? v - shift : soft_threshold(v, t);
                }
            return X;
        }
    }
    return V;
}

}  // namespace stratcov
