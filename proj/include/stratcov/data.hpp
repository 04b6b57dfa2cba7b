#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stratcov {

/// Records (z, y) with stratum index z in [0, K) and observation y in R^n.
struct StratDataset {
    struct Record {
        int z = 0;
        std::vector<double> y;
    };

    int n = 0;
    int K = 0;
    std::vector<Record> records;

    int m() const { return static_cast<int>(records.size()); }
};

struct SplitSpec {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitResult {
    StratDataset train, val, test;
    std::vector<int> train_idx, val_idx, test_idx;  // original record indices
};

/// CSV with header "z,y1,...,yn". Throws ParseError with the offending line
/// number, DimensionMismatch for a wrong column count in the header, and
/// RangeError when expect_K > 0 and some z falls outside [0, expect_K).
StratDataset load_csv(const std::string& path, int n, int expect_K = 0);

void save_csv(const std::string& path, const StratDataset& ds);

/// Clips to the [p_lo, p_hi] empirical percentiles (linear interpolation
/// between order statistics).
std::vector<double> winsorize(std::span<const double> values, double p_lo, double p_hi);

/// Empirical quantile with linear interpolation, p in [0, 100].
double quantile(std::span<const double> values, double p);

/// Quantile binner fitted on a training series; bin boundaries are the
/// j/bins quantiles. Values outside the training range clamp to the edge
/// bins, and b(v) is monotone in v.
class QuantileBinner {
public:
    static QuantileBinner fit(std::span<const double> train, int bins);
    int bin(double v) const;
    int bins() const { return static_cast<int>(boundaries_.size()) + 1; }
    const std::vector<double>& boundaries() const { return boundaries_; }

private:
    std::vector<double> boundaries_;
};

/// Bins a series against its own quantiles.
std::vector<int> quantile_bin(std::span<const double> values, int bins);

/// Seeded shuffle followed by contiguous slices; the rounding residue goes
/// to train. A partition: every record lands in exactly one part.
SplitResult split(const StratDataset& ds, const SplitSpec& spec);

}  // namespace stratcov
