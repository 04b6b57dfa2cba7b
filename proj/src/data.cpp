#include "stratcov/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "stratcov/errors.hpp"
#include "stratcov/rng.hpp"
#include "stratcov/util.hpp"

namespace stratcov {

void SplitSpec::validate() const {
    for (double f : {train, val, test})
        if (f < 0.0 || f > 1.0) throw Error("split fractions must lie in [0, 1]");
    if (std::abs(train + val + test - 1.0) > 1e-12)
        throw Error("split fractions must sum to 1");
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_field_double(std::string_view f, std::size_t line_no) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size())
        throw ParseError("bad numeric field '" + std::string(f) + "'", line_no);
    return v;
}

long parse_field_int(std::string_view f, std::size_t line_no) {
    long v = 0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size())
        throw ParseError("bad integer field '" + std::string(f) + "'", line_no);
    return v;
}

}  // namespace

StratDataset load_csv(const std::string& path, int n, int expect_K) {
    if (n < 1) throw DimensionMismatch("load_csv: dimension must be >= 1");
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset: " + path);

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::string expected = "z";
        for (int i = 1; i <= n; ++i) expected += ",y" + std::to_string(i);
        if (line != expected)
            throw DimensionMismatch("load_csv: header mismatch, expected '" + expected + "'");
    }

    StratDataset ds;
    ds.n = n;
    int max_z = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != static_cast<std::size_t>(n) + 1)
            throw ParseError("expected " + std::to_string(n + 1) + " columns, got " +
                                 std::to_string(fields.size()),
                             line_no);
        StratDataset::Record rec;
        const long z = parse_field_int(fields[0], line_no);
        if (z < 0) throw RangeError("stratum index " + std::to_string(z) + " is negative (line " +
                                    std::to_string(line_no) + ")");
        if (expect_K > 0 && z >= expect_K)
            throw RangeError("stratum index " + std::to_string(z) + " outside [0, " +
                             std::to_string(expect_K) + ") (line " + std::to_string(line_no) + ")");
        rec.z = static_cast<int>(z);
        rec.y.resize(n);
        for (int i = 0; i < n; ++i) rec.y[i] = parse_field_double(fields[i + 1], line_no);
        max_z = std::max(max_z, rec.z);
        ds.records.push_back(std::move(rec));
    }
    ds.K = expect_K > 0 ? expect_K : max_z + 1;
    return ds;
}

void save_csv(const std::string& path, const StratDataset& ds) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset: " + path);
    out << "z";
    for (int i = 1; i <= ds.n; ++i) out << ",y" << i;
    out << "\n";
    for (const auto& rec : ds.records) {
        out << rec.z;
        for (double v : rec.y) out << ',' << format_double(v);
        out << "\n";
    }
}

double quantile(std::span<const double> values, double p) {
    if (values.empty()) throw EmptySeries("quantile of empty series");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = (p / 100.0) * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> winsorize(std::span<const double> values, double p_lo, double p_hi) {
    if (values.empty()) throw EmptySeries("winsorize of empty series");
    if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 100.0))
        throw Error("winsorize needs 0 <= p_lo < p_hi <= 100");
    const double lo = quantile(values, p_lo);
    const double hi = quantile(values, p_hi);
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v = std::clamp(v, lo, hi);
    return out;
}

QuantileBinner QuantileBinner::fit(std::span<const double> train, int bins) {
    if (train.empty()) throw EmptySeries("quantile_bin of empty series");
    if (bins < 1) throw Error("quantile_bin needs bins >= 1");
    QuantileBinner qb;
    qb.boundaries_.reserve(bins - 1);
    for (int j = 1; j < bins; ++j)
        qb.boundaries_.push_back(quantile(train, 100.0 * j / bins));
    return qb;
}

int QuantileBinner::bin(double v) const {
    // Number of boundaries strictly below v; equal-to-boundary values fall
    // into the lower bin, so an all-equal series maps to bin 0.
    const auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), v);
    return static_cast<int>(it - boundaries_.begin());
}

std::vector<int> quantile_bin(std::span<const double> values, int bins) {
    const QuantileBinner qb = QuantileBinner::fit(values, bins);
    std::vector<int> idx(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) idx[i] = qb.bin(values[i]);
    return idx;
}

SplitResult split(const StratDataset& ds, const SplitSpec& spec) {
    spec.validate();
    const int m = ds.m();
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(spec.seed);
    for (int i = m - 1; i > 0; --i) {
        const int j = rng.uniform_int(i + 1);
        std::swap(order[i], order[j]);
    }

    const int n_val = static_cast<int>(std::floor(spec.val * m));
    const int n_test = static_cast<int>(std::floor(spec.test * m));
    const int n_train = m - n_val - n_test;

    SplitResult out;
    auto take = [&](StratDataset& part, std::vector<int>& idx, int from, int count) {
        part.n = ds.n;
        part.K = ds.K;
        part.records.reserve(count);
        idx.reserve(count);
        for (int i = from; i < from + count; ++i) {
            part.records.push_back(ds.records[order[i]]);
            idx.push_back(order[i]);
        }
    };
    take(out.train, out.train_idx, 0, n_train);
    take(out.val, out.val_idx, n_train, n_val);
    take(out.test, out.test_idx, n_train + n_val, n_test);
    return out;
}

}  // namespace stratcov
