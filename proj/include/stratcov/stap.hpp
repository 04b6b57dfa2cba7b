#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "stratcov/data.hpp"
#include "stratcov/linalg.hpp"
#include "stratcov/model.hpp"

namespace stratcov {

/// Hermitian matrix split into a symmetric real part and an antisymmetric
/// imaginary part.
struct ComplexHermitian {
    int dim = 0;
    Matrix re;
    Matrix im;

    static ComplexHermitian from_parts(Matrix re, Matrix im);
};

/// One radar cell: bin centers for range (km), azimuth (deg), Doppler (Hz)
/// plus the bin indices.
struct RadarOrientation {
    double r_km = 0.0;
    double a_deg = 0.0;
    double d_hz = 0.0;
    int ir = 0, ia = 0, id = 0;
};

struct StapConfig {
    std::uint64_t seed = 2020;
    int complex_dim = 15;                 // observation dimension is 2x this
    std::array<int, 3> bins = {10, 10, 10};  // range, azimuth, doppler
    int sample_count = 2900;
    double f_r = 1984.0;                  // pulse repetition frequency, Hz
    double pd_floor = 1e-3;               // relative eigenvalue floor for generated covariances
    bool range_in_meters = true;          // see range_coefficient()
    bool unit_trace_bases = false;        // normalize basis matrices to unit trace
    double empty_fraction = 0.625;        // strata left without samples
    int doppler_taps = 3;                 // steering structure; taps products must
    int azimuth_taps = 5;                 //   equal complex_dim
    std::array<double, 2> range_interval = {35.0, 50.0};
    std::array<double, 2> azimuth_interval = {87.0, 267.0};
    std::array<double, 2> doppler_interval = {-992.0, 992.0};

    int stratum_count() const { return bins[0] * bins[1] * bins[2]; }
    void validate() const;
};

/// Stratum index layout: z = (ir * bins[1] + ia) * bins[2] + id.
RadarOrientation orientation_of(const StapConfig& cfg, int z);

/// Weight of the range basis matrix. The reference range is 4e4 in the
/// units of r: with range_in_meters the bin center (km) is converted to
/// meters, so the coefficient stays O(1) over [35, 50] km; the raw mode
/// applies the constant to the km value directly.
double range_coefficient(double r_km, bool range_in_meters);

/// cos + sin of the azimuth angle (degrees).
double azimuth_coefficient(double a_deg);

double doppler_coefficient(double d_hz);

struct StapTruth {
    StapConfig cfg;
    std::vector<RadarOrientation> orientations;
    std::vector<ComplexHermitian> sigma_complex;  // repaired Hermitian covariances
    std::vector<SymMatrix> sigma;                 // their real embeddings, dim 2*complex_dim
};

/// Mixes three seeded random Hermitian PSD bases per orientation and floors
/// the spectrum at pd_floor times the absolute-coefficient trace scale.
StapTruth generate_true_covariances(const StapConfig& cfg);

/// [[Re, -Im], [Im, Re]]; eigenvalues of H, each with doubled multiplicity.
SymMatrix realify(const ComplexHermitian& H);

/// (Re v, Im v) concatenation.
std::vector<double> realify_vector(std::span<const double> re, std::span<const double> im);

/// Seeded draws y ~ N(0, Sigma_z). Sample counts come from a Dirichlet
/// weighted multinomial over a seeded subset of strata sized by
/// empty_fraction; per-stratum streams are seeded with cfg.seed XOR z.
StratDataset sample_dataset(const StapTruth& truth, const StapConfig& cfg);

/// Real embedding of (1, z_d, ..) kron (1, z_a, ..) with z_a = e^{2 pi i sin a},
/// z_d = e^{2 pi i d / f_R}; a enters sin in radians. Squared norm equals
/// complex_dim.
std::vector<double> steering_vector(const RadarOrientation& z, const StapConfig& cfg);

/// (s^T theta y)^2 / (s^T theta s). Throws ZeroSteering when s = 0.
double detection_stat(std::span<const double> s, const SymMatrix& theta,
                      std::span<const double> y);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct Roc {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// Threshold sweep with tied scores grouped; AUC by the trapezoid rule.
/// Throws SingleClass unless both labels are present.
Roc roc_curve(std::span<const double> scores, std::span<const char> labels);

struct DetectionReport {
    Roc roc_common;
    Roc roc_strat;
    int trials = 0;
    int targets = 0;
};

/// Seeded target-vs-noise trials (trial t uses stratum t mod K), scored with
/// each model's theta_z. The common model must have K = 1.
DetectionReport detection_experiment(const StratModel& common, const StratModel& strat,
                                     const StapTruth& truth, int trials, std::uint64_t seed);

/// Truth covariances in the model JSON schema (content "covariance") with
/// the generator configuration embedded under "stap".
void save_stap_truth(const std::string& path, const StapTruth& truth);
StapTruth load_stap_truth(const std::string& path);

}  // namespace stratcov
