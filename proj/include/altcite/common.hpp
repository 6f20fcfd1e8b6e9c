#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace altcite {

enum class Errc {
    missing_column,
    negative_value,
    duplicate_doi,
    empty_file,
    no_overlap,
    too_few_records,
    too_few_rows,
    unknown_feature,
    degenerate_split,
    bad_k,
    length_mismatch,
    empty_matrix,
    empty_data,
    single_class,
    feature_count_mismatch,
    rank_deficient,
    empty_grid,
    parse_error,
    io_error,
    bad_argument,
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::missing_column: return "MissingColumn";
    case Errc::negative_value: return "NegativeValue";
    case Errc::duplicate_doi: return "DuplicateDoi";
    case Errc::empty_file: return "EmptyFile";
    case Errc::no_overlap: return "NoOverlap";
    case Errc::too_few_records: return "TooFewRecords";
    case Errc::too_few_rows: return "TooFewRows";
    case Errc::unknown_feature: return "UnknownFeature";
    case Errc::degenerate_split: return "DegenerateSplit";
    case Errc::bad_k: return "BadK";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_matrix: return "EmptyMatrix";
    case Errc::empty_data: return "EmptyData";
    case Errc::single_class: return "SingleClass";
    case Errc::feature_count_mismatch: return "FeatureCountMismatch";
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::empty_grid: return "EmptyGrid";
    case Errc::parse_error: return "ParseError";
    case Errc::io_error: return "IoError";
    case Errc::bad_argument: return "BadArgument";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// Deterministic 64-bit mixing (SplitMix64 finalizer). Member seeds, per-record
// streams and epoch shuffles are all derived through this one function so runs
// replay bit-for-bit across platforms.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// SplitMix64 stream. Self-contained so results do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Unbiased-enough bounded draw (multiply-shift); n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        shuffle(p);
        return p;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    double* row(std::size_t i) { return data_.data() + i * cols_; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline constexpr int kModelFormatVersion = 1;

inline void check_width(std::size_t model_features, const Matrix& X) {
    if (X.cols() != model_features)
        fail(Errc::feature_count_mismatch,
             "model expects " + std::to_string(model_features) + " features, got " +
                 std::to_string(X.cols()));
}

// ---- small numeric helpers ----

inline double round_half_up(double x) { return std::floor(x + 0.5); }

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double population_std(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

/// Quantile of pre-sorted data, linear interpolation between closest ranks:
/// rank h = p*(n-1), value = x[floor(h)] + frac(h)*(x[ceil(h)] - x[floor(h)]).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) fail(Errc::empty_data, "quantile of empty vector");
    if (sorted.size() == 1) return sorted[0];
    p = std::clamp(p, 0.0, 1.0);
    double h = p * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile_of(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    return quantile_sorted(v, p);
}

/// Fixed formatting used by every report table (three decimals).
inline std::string fmt3(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", x);
    return buf;
}

inline std::string fmt_g(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace altcite
