#include "stratcov/stap.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "stratcov/errors.hpp"
#include "stratcov/rng.hpp"
#include "stratcov/util.hpp"

namespace stratcov {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDegToRad = 0.017453292519943295769236907684886;
}  // namespace

ComplexHermitian ComplexHermitian::from_parts(Matrix re, Matrix im) {
    const int n = re.rows;
    if (re.cols != n || im.rows != n || im.cols != n)
        throw DimensionMismatch("ComplexHermitian: parts must be square and equal sized");
    const double scale = 1.0 + std::sqrt(norm2(re.a));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            if (std::abs(re.at(i, j) - re.at(j, i)) > 1e-12 * scale)
                throw Error("ComplexHermitian: real part not symmetric");
            if (std::abs(im.at(i, j) + im.at(j, i)) > 1e-12 * scale)
                throw Error("ComplexHermitian: imaginary part not antisymmetric");
        }
    for (int i = 0; i < n; ++i)
        if (std::abs(im.at(i, i)) > 1e-12 * scale)
            throw Error("ComplexHermitian: imaginary diagonal must vanish");
    return ComplexHermitian{n, std::move(re), std::move(im)};
}

void StapConfig::validate() const {
    if (complex_dim < 1) throw Error("StapConfig: complex_dim must be >= 1");
    for (int b : bins)
        if (b < 1) throw Error("StapConfig: bins must be >= 1");
    if (sample_count < 1) throw Error("StapConfig: sample_count must be >= 1");
    if (!(f_r > 0.0)) throw Error("StapConfig: f_r must be positive");
    if (!(pd_floor > 0.0)) throw Error("StapConfig: pd_floor must be positive");
    if (empty_fraction < 0.0 || empty_fraction >= 1.0)
        throw Error("StapConfig: empty_fraction must be in [0, 1)");
    if (doppler_taps * azimuth_taps != complex_dim)
        throw Error("StapConfig: doppler_taps * azimuth_taps must equal complex_dim");
}

RadarOrientation orientation_of(const StapConfig& cfg, int z) {
    if (z < 0 || z >= cfg.stratum_count()) throw RangeError("orientation_of: z out of range");
    RadarOrientation o;
    o.id = z % cfg.bins[2];
    o.ia = (z / cfg.bins[2]) % cfg.bins[1];
    o.ir = z / (cfg.bins[1] * cfg.bins[2]);
    auto center = [](const std::array<double, 2>& iv, int bins, int i) {
        return iv[0] + (i + 0.5) * (iv[1] - iv[0]) / bins;
    };
    o.r_km = center(cfg.range_interval, cfg.bins[0], o.ir);
    o.a_deg = center(cfg.azimuth_interval, cfg.bins[1], o.ia);
    o.d_hz = center(cfg.doppler_interval, cfg.bins[2], o.id);
    return o;
}

double range_coefficient(double r_km, bool range_in_meters) {
    const double r = range_in_meters ? 1000.0 * r_km : r_km;
    return sqr(4e4 / r);
}

double azimuth_coefficient(double a_deg) {
    const double a = a_deg * kDegToRad;
    return std::cos(a) + std::sin(a);
}

double doppler_coefficient(double d_hz) { return 1.0 + d_hz / 1000.0; }

SymMatrix realify(const ComplexHermitian& H) {
    const int n = H.dim;
    Matrix R(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            R.at(i, j) = H.re.at(i, j);
            R.at(i, n + j) = -H.im.at(i, j);
            R.at(n + i, j) = H.im.at(i, j);
            R.at(n + i, n + j) = H.re.at(i, j);
        }
    return SymMatrix(2 * n, R.a);
}

std::vector<double> realify_vector(std::span<const double> re, std::span<const double> im) {
    if (re.size() != im.size()) throw DimensionMismatch("realify_vector: part sizes differ");
    std::vector<double> out;
    out.reserve(2 * re.size());
    out.insert(out.end(), re.begin(), re.end());
    out.insert(out.end(), im.begin(), im.end());
    return out;
}

namespace {

// B B^H / dim for B with independent standard complex Gaussian entries.
ComplexHermitian random_hermitian_psd(int dim, Rng& rng) {
    Matrix X(dim, dim), Y(dim, dim);
    const double inv_sqrt2 = 0.70710678118654752440084436210485;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            X.at(i, j) = rng.normal() * inv_sqrt2;
            Y.at(i, j) = rng.normal() * inv_sqrt2;
        }
    Matrix re(dim, dim), im(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double sre = 0.0, sim = 0.0;
            for (int k = 0; k < dim; ++k) {
                // (X + iY)(X^T - iY^T): re = XX^T + YY^T, im = YX^T - XY^T
                sre += X.at(i, k) * X.at(j, k) + Y.at(i, k) * Y.at(j, k);
                sim += Y.at(i, k) * X.at(j, k) - X.at(i, k) * Y.at(j, k);
            }
            re.at(i, j) = sre / dim;
            im.at(i, j) = sim / dim;
        }
    // Exact symmetry for downstream invariants.
    for (int i = 0; i < dim; ++i) {
        im.at(i, i) = 0.0;
        for (int j = 0; j < i; ++j) {
            const double r = 0.5 * (re.at(i, j) + re.at(j, i));
            re.at(i, j) = re.at(j, i) = r;
            const double m = 0.5 * (im.at(i, j) - im.at(j, i));
            im.at(i, j) = m;
            im.at(j, i) = -m;
        }
    }
    return ComplexHermitian::from_parts(std::move(re), std::move(im));
}

void normalize_trace(ComplexHermitian& H) {
    double tr = 0.0;
    for (int i = 0; i < H.dim; ++i) tr += H.re.at(i, i);
    if (!(tr > 0.0)) throw InternalError("basis trace must be positive");
    for (double& v : H.re.a) v /= tr;
    for (double& v : H.im.a) v /= tr;
}

double hermitian_trace(const ComplexHermitian& H) {
    double tr = 0.0;
    for (int i = 0; i < H.dim; ++i) tr += H.re.at(i, i);
    return tr;
}

}  // namespace

StapTruth generate_true_covariances(const StapConfig& cfg) {
    cfg.validate();
    const int dim = cfg.complex_dim;
    Rng rng(cfg.seed);
    ComplexHermitian basis_range = random_hermitian_psd(dim, rng);
    ComplexHermitian basis_azi = random_hermitian_psd(dim, rng);
    ComplexHermitian basis_dopp = random_hermitian_psd(dim, rng);
    if (cfg.unit_trace_bases) {
        normalize_trace(basis_range);
        normalize_trace(basis_azi);
        normalize_trace(basis_dopp);
    }
    const double tr_range = hermitian_trace(basis_range);
    const double tr_azi = hermitian_trace(basis_azi);
    const double tr_dopp = hermitian_trace(basis_dopp);

    StapTruth truth;
    truth.cfg = cfg;
    const int K = cfg.stratum_count();
    truth.orientations.reserve(K);
    truth.sigma_complex.reserve(K);
    truth.sigma.reserve(K);

    for (int z = 0; z < K; ++z) {
        const RadarOrientation o = orientation_of(cfg, z);
        const double cr = range_coefficient(o.r_km, cfg.range_in_meters);
        const double ca = azimuth_coefficient(o.a_deg);
        const double cd = doppler_coefficient(o.d_hz);

        Matrix re(dim, dim), im(dim, dim);
        for (std::size_t e = 0; e < re.a.size(); ++e) {
            re.a[e] = cr * basis_range.re.a[e] + ca * basis_azi.re.a[e] + cd * basis_dopp.re.a[e];
            im.a[e] = cr * basis_range.im.a[e] + ca * basis_azi.im.a[e] + cd * basis_dopp.im.a[e];
        }

        // The azimuth coefficient is negative over part of the interval, so
        // the mixture can be indefinite. Floor the spectrum at a fraction of
        // the absolute-coefficient trace scale (positive by construction).
        const double scale =
            (std::abs(cr) * tr_range + std::abs(ca) * tr_azi + std::abs(cd) * tr_dopp) / dim;
        const double floor = cfg.pd_floor * scale;

        SymMatrix embedded = clamp_eigenvalues(
            realify(ComplexHermitian{dim, std::move(re), std::move(im)}), floor);

        // Project the repaired matrix back onto the embedding structure so the
        // stored complex and real forms agree exactly.
        Matrix re2(dim, dim), im2(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                re2.at(i, j) = 0.5 * (embedded(i, j) + embedded(dim + i, dim + j));
                im2.at(i, j) = 0.5 * (embedded(dim + i, j) - embedded(i, dim + j));
            }
        for (int i = 0; i < dim; ++i) {
            im2.at(i, i) = 0.0;
            for (int j = 0; j < i; ++j) {
                const double r = 0.5 * (re2.at(i, j) + re2.at(j, i));
                re2.at(i, j) = re2.at(j, i) = r;
                const double m = 0.5 * (im2.at(i, j) - im2.at(j, i));
                im2.at(i, j) = m;
                im2.at(j, i) = -m;
            }
        }
        ComplexHermitian repaired = ComplexHermitian::from_parts(std::move(re2), std::move(im2));
        truth.sigma.push_back(realify(repaired));
        truth.sigma_complex.push_back(std::move(repaired));
        truth.orientations.push_back(o);
    }
    return truth;
}

StratDataset sample_dataset(const StapTruth& truth, const StapConfig& cfg) {
    cfg.validate();
    const int K = cfg.stratum_count();
    if (static_cast<int>(truth.sigma.size()) != K)
        throw DimensionMismatch("sample_dataset: truth does not match config");

    Rng rng(cfg.seed);

    // Seeded subset of strata that receive samples.
    const int n_empty = static_cast<int>(std::lround(cfg.empty_fraction * K));
    const int n_occupied = std::max(1, K - n_empty);
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    for (int i = K - 1; i > 0; --i) {
        const int j = rng.uniform_int(i + 1);
        std::swap(order[i], order[j]);
    }
    order.resize(n_occupied);
    std::sort(order.begin(), order.end());

    // Dirichlet(1/2) weights give the uneven per-stratum occupancy profile.
    std::vector<double> cum(n_occupied);
    double total = 0.0;
    for (int i = 0; i < n_occupied; ++i) {
        total += rng.gamma_half() + 1e-12;
        cum[i] = total;
    }
    std::vector<int> counts(K, 0);
    for (int s = 0; s < cfg.sample_count; ++s) {
        const double u = rng.uniform() * total;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const int pick = static_cast<int>(std::min<std::ptrdiff_t>(it - cum.begin(),
                                                                   n_occupied - 1));
        ++counts[order[pick]];
    }

    StratDataset ds;
    ds.n = 2 * cfg.complex_dim;
    ds.K = K;
    ds.records.reserve(cfg.sample_count);
    std::vector<double> zvec(ds.n);
    for (int z = 0; z < K; ++z) {
        if (counts[z] == 0) continue;
        const Matrix L = cholesky(truth.sigma[z]);
        Rng stream(cfg.seed ^ static_cast<std::uint64_t>(z));
        for (int s = 0; s < counts[z]; ++s) {
            for (double& v : zvec) v = stream.normal();
            StratDataset::Record rec;
            rec.z = z;
            rec.y.assign(ds.n, 0.0);
            for (int i = 0; i < ds.n; ++i) {
                double acc = 0.0;
                for (int j = 0; j <= i; ++j) acc += L.at(i, j) * zvec[j];
                rec.y[i] = acc;
            }
            ds.records.push_back(std::move(rec));
        }
    }
    return ds;
}

std::vector<double> steering_vector(const RadarOrientation& z, const StapConfig& cfg) {
    const std::complex<double> za =
        std::exp(std::complex<double>(0.0, kTwoPi * std::sin(z.a_deg * kDegToRad)));
    const std::complex<double> zd =
        std::exp(std::complex<double>(0.0, kTwoPi * z.d_hz / cfg.f_r));
    std::vector<std::complex<double>> s;
    s.reserve(cfg.complex_dim);
    std::complex<double> dp(1.0, 0.0);
    for (int i = 0; i < cfg.doppler_taps; ++i) {
        std::complex<double> ap(1.0, 0.0);
        for (int j = 0; j < cfg.azimuth_taps; ++j) {
            s.push_back(dp * ap);
            ap *= za;
        }
        dp *= zd;
    }
    std::vector<double> re(s.size()), im(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        re[i] = s[i].real();
        im[i] = s[i].imag();
    }
    return realify_vector(re, im);
}

double detection_stat(std::span<const double> s, const SymMatrix& theta,
                      std::span<const double> y) {
    if (static_cast<int>(s.size()) != theta.dim() || s.size() != y.size())
        throw DimensionMismatch("detection_stat: size mismatch");
    const std::vector<double> ts = matvec(theta, s);
    const double sts = dot(ts, s);
    if (!(sts > 0.0)) throw ZeroSteering("detection_stat: s^T theta s must be positive");
    const double sty = dot(ts, y);
    return sty * sty / sts;
}

Roc roc_curve(std::span<const double> scores, std::span<const char> labels) {
    if (scores.size() != labels.size())
        throw DimensionMismatch("roc_curve: scores/labels size mismatch");
    long pos = 0, neg = 0;
    for (char l : labels) (l ? pos : neg)++;
    if (pos == 0 || neg == 0) throw SingleClass("roc_curve needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    Roc roc;
    roc.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    std::size_t i = 0;
    double auc = 0.0;
    while (i < order.size()) {
        std::size_t j = i;
        // Group tied scores: a threshold cannot separate them.
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t t = i; t < j; ++t) (labels[order[t]] ? tp : fp)++;
        const RocPoint prev = roc.points.back();
        const RocPoint cur = {static_cast<double>(fp) / neg, static_cast<double>(tp) / pos};
        auc += (cur.fpr - prev.fpr) * 0.5 * (cur.tpr + prev.tpr);
        roc.points.push_back(cur);
        i = j;
    }
    roc.auc = auc;
    return roc;
}

DetectionReport detection_experiment(const StratModel& common, const StratModel& strat,
                                     const StapTruth& truth, int trials, std::uint64_t seed) {
    if (common.K != 1) throw DimensionMismatch("detection_experiment: common model must have K=1");
    const int K = static_cast<int>(truth.sigma.size());
    if (strat.K != K) throw DimensionMismatch("detection_experiment: model/truth K mismatch");
    if (trials < 2) throw Error("detection_experiment: need at least two trials");
    const int n = strat.n;

    std::vector<Matrix> chol(K);
    std::vector<std::vector<double>> steer(K);

    std::vector<double> score_c(trials), score_s(trials);
    std::vector<char> labels(trials);
    Rng rng(seed);
    std::vector<double> zvec(n), y(n);
    int targets = 0;
    for (int t = 0; t < trials; ++t) {
        const int z = t % K;
        if (chol[z].rows == 0) {
            chol[z] = cholesky(truth.sigma[z]);
            steer[z] = steering_vector(truth.orientations[z], truth.cfg);
        }
        for (double& v : zvec) v = rng.normal();
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j <= i; ++j) acc += chol[z].at(i, j) * zvec[j];
            y[i] = acc;
        }
        const bool target = rng.uniform() < 0.5;
        if (target) {
            ++targets;
            for (int i = 0; i < n; ++i) y[i] += steer[z][i];
        }
        labels[t] = target ? 1 : 0;
        score_c[t] = detection_stat(steer[z], common.theta[0], y);
        score_s[t] = detection_stat(steer[z], strat.theta[z], y);
    }

    DetectionReport rep;
    rep.roc_common = roc_curve(score_c, labels);
    rep.roc_strat = roc_curve(score_s, labels);
    rep.trials = trials;
    rep.targets = targets;
    return rep;
}

void save_stap_truth(const std::string& path, const StapTruth& truth) {
    nlohmann::json j;
    j["version"] = kModelSchemaVersion;
    j["content"] = "covariance";
    j["K"] = static_cast<int>(truth.sigma.size());
    j["n"] = truth.sigma.empty() ? 0 : truth.sigma[0].dim();
    nlohmann::json theta = nlohmann::json::array();
    for (const auto& s : truth.sigma) {
        nlohmann::json rows = nlohmann::json::array();
        for (double v : s.data()) rows.push_back(v);
        theta.push_back(std::move(rows));
    }
    j["theta"] = std::move(theta);
    const StapConfig& c = truth.cfg;
    j["stap"] = {{"seed", c.seed},
                 {"complex_dim", c.complex_dim},
                 {"bins", c.bins},
                 {"samples", c.sample_count},
                 {"f_r", c.f_r},
                 {"pd_floor", c.pd_floor},
                 {"range_in_meters", c.range_in_meters},
                 {"unit_trace_bases", c.unit_trace_bases},
                 {"empty_fraction", c.empty_fraction},
                 {"doppler_taps", c.doppler_taps},
                 {"azimuth_taps", c.azimuth_taps},
                 {"range_interval", c.range_interval},
                 {"azimuth_interval", c.azimuth_interval},
                 {"doppler_interval", c.doppler_interval}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write truth file: " + path);
    out << j.dump(1) << "\n";
}

StapTruth load_stap_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open truth file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j = nlohmann::json::parse(ss.str());
    if (j.at("version").get<std::string>() != kModelSchemaVersion)
        throw Error("unsupported truth schema version");
    if (j.value("content", "") != "covariance")
        throw Error("truth file must carry content=covariance");
    if (!j.contains("stap")) throw Error("truth file is missing the generator config");

    StapTruth truth;
    const auto& s = j["stap"];
    StapConfig& c = truth.cfg;
    c.seed = s.at("seed").get<std::uint64_t>();
    c.complex_dim = s.at("complex_dim").get<int>();
    c.bins = s.at("bins").get<std::array<int, 3>>();
    c.sample_count = s.at("samples").get<int>();
    c.f_r = s.at("f_r").get<double>();
    c.pd_floor = s.at("pd_floor").get<double>();
    c.range_in_meters = s.at("range_in_meters").get<bool>();
    c.unit_trace_bases = s.at("unit_trace_bases").get<bool>();
    c.empty_fraction = s.at("empty_fraction").get<double>();
    c.doppler_taps = s.at("doppler_taps").get<int>();
    c.azimuth_taps = s.at("azimuth_taps").get<int>();
    c.range_interval = s.at("range_interval").get<std::array<double, 2>>();
    c.azimuth_interval = s.at("azimuth_interval").get<std::array<double, 2>>();
    c.doppler_interval = s.at("doppler_interval").get<std::array<double, 2>>();
    c.validate();

    const int K = j.at("K").get<int>();
    const int n = j.at("n").get<int>();
    if (K != c.stratum_count() || n != 2 * c.complex_dim)
        throw DimensionMismatch("truth file dimensions do not match its config");
    const auto& theta = j.at("theta");
    if (static_cast<int>(theta.size()) != K)
        throw DimensionMismatch("truth file: theta count != K");
    truth.orientations.reserve(K);
    truth.sigma.reserve(K);
    truth.sigma_complex.reserve(K);
    const int dim = c.complex_dim;
    for (int z = 0; z < K; ++z) {
        truth.orientations.push_back(orientation_of(c, z));
        std::vector<double> buf = theta[z].get<std::vector<double>>();
        if (buf.size() != static_cast<std::size_t>(n) * n)
            throw DimensionMismatch("truth file: sigma entry size != n*n");
        SymMatrix sigma(n, buf);
        Matrix re(dim, dim), im(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int q = 0; q < dim; ++q) {
                re.at(i, q) = 0.5 * (sigma(i, q) + sigma(dim + i, dim + q));
                im.at(i, q) = 0.5 * (sigma(dim + i, q) - sigma(i, dim + q));
            }
        for (int i = 0; i < dim; ++i) {
            im.at(i, i) = 0.0;
            for (int q = 0; q < i; ++q) {
                const double r = 0.5 * (re.at(i, q) + re.at(q, i));
                re.at(i, q) = re.at(q, i) = r;
                const double m = 0.5 * (im.at(i, q) - im.at(q, i));
                im.at(i, q) = m;
                im.at(q, i) = -m;
            }
        }
        truth.sigma_complex.push_back(ComplexHermitian::from_parts(std::move(re), std::move(im)));
        truth.sigma.push_back(std::move(sigma));
    }
    return truth;
}

}  // namespace stratcov
