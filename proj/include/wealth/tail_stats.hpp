#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace wealth {

struct TailEstimate {
    double alpha_hat = 0.0;
    int k = 0;
    double stderr_ = 0.0;   // alpha_hat / sqrt(k)
    double threshold = 0.0; // the k-th largest positive value
    double negative_fraction = 0.0;  // share of the sample excluded as <= 0
};

/// Hill estimator on the k largest positive observations; non-positive values
/// are excluded from the ranking. Throws InsufficientData (k < 10 or fewer
/// than k + 1 positive values) or NonPositiveThreshold (zero log spacings).
TailEstimate hill(std::span<const double> sample, int k);

/// ceil(n^0.6) for n positive observations.
int default_hill_k(std::size_t n_positive);

struct HillPoint {
    int k;
    double alpha_hat;
};

/// alpha_hat over k = 16, 32, 64, ... while k < n_positive.
std::vector<HillPoint> hill_sensitivity(std::span<const double> sample);

/// sup_x |F_n(x) - F(x)|.
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;         // unbiased
    double skewness = 0.0;         // m3 / m2^1.5
    double excess_kurtosis = 0.0;  // m4 / m2^2 - 3
    std::size_t n = 0;
};

/// Compensated (Neumaier) sums. Throws InsufficientData for n < 2.
Moments moments(std::span<const double> sample);

struct CcdfPoint {
    double log_x;
    double log_ccdf;
};

/// Rank-based empirical P(X > x) over `n_points` log-spaced x between the
/// smallest and largest positive observations. Throws InsufficientData when
/// no positive observation exists.
std::vector<CcdfPoint> ccdf_loglog(std::span<const double> sample, int n_points);

/// Least-squares slope of a CCDF table.
double ccdf_slope(const std::vector<CcdfPoint>& table);

void write_ccdf_csv(std::ostream& os, const std::vector<CcdfPoint>& table);

}  // namespace wealth
