#include "wealth/tail_stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "wealth/errors.hpp"

namespace wealth {

namespace {

// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

std::vector<double> positives_descending(std::span<const double> sample) {
    std::vector<double> pos;
    pos.reserve(sample.size());
    for (double x : sample)
        if (x > 0.0) pos.push_back(x);
    std::sort(pos.begin(), pos.end(), std::greater<>());
    return pos;
}

double hill_from_sorted(const std::vector<double>& desc, int k) {
    const double log_threshold = std::log(desc[k]);
    CompensatedSum acc;
    for (int m = 0; m < k; ++m) acc.add(std::log(desc[m]) - log_threshold);
    const double mean_spacing = acc.value() / k;
    if (!(mean_spacing > 0.0)) throw NonPositiveThreshold("hill: zero log spacings above the threshold (tied sample)");
    return 1.0 / mean_spacing;
}

}  // namespace

TailEstimate hill(std::span<const double> sample, int k) {
    if (k < 10) throw InsufficientData("hill: k must be at least 10");
    const std::vector<double> desc = positives_descending(sample);
    if (static_cast<int>(desc.size()) < k + 1) {
        std::ostringstream os;
        os << "hill: need " << k + 1 << " positive observations, have " << desc.size();
        throw InsufficientData(os.str());
    }
    TailEstimate est;
    est.k = k;
    est.threshold = desc[k - 1];
    est.alpha_hat = hill_from_sorted(desc, k);
    est.stderr_ = est.alpha_hat / std::sqrt(static_cast<double>(k));
    est.negative_fraction = sample.empty() ? 0.0 : 1.0 - static_cast<double>(desc.size()) / sample.size();
    return est;
}

int default_hill_k(std::size_t n_positive) {
    return static_cast<int>(std::ceil(std::pow(static_cast<double>(n_positive), 0.6)));
}

std::vector<HillPoint> hill_sensitivity(std::span<const double> sample) {
    const std::vector<double> desc = positives_descending(sample);
    std::vector<HillPoint> out;
    for (int k = 16; k < static_cast<int>(desc.size()); k *= 2) {
        try {
            out.push_back({k, hill_from_sorted(desc, k)});
        } catch (const NonPositiveThreshold&) {
        }
    }
    return out;
}

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InsufficientData("ks_distance: empty sample");
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, f - i / n, (i + 1) / n - f});
    }
    return std::clamp(d, 0.0, 1.0);
}

Moments moments(std::span<const double> sample) {
    if (sample.size() < 2) throw InsufficientData("moments: need at least two observations");
    const double n = static_cast<double>(sample.size());
    CompensatedSum s1;
    for (double x : sample) s1.add(x);
    const double mean = s1.value() / n;
    CompensatedSum s2, s3, s4;
    for (double x : sample) {
        const double d = x - mean;
        const double d2 = d * d;
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }
    Moments m;
    m.n = sample.size();
    m.mean = mean;
    m.variance = s2.value() / (n - 1.0);
    const double m2 = s2.value() / n;
    if (m2 > 0.0) {
        m.skewness = (s3.value() / n) / std::pow(m2, 1.5);
        m.excess_kurtosis = (s4.value() / n) / (m2 * m2) - 3.0;
    }
    return m;
}

std::vector<CcdfPoint> ccdf_loglog(std::span<const double> sample, int n_points) {
    std::vector<double> pos;
    for (double x : sample)
        if (x > 0.0) pos.push_back(x);
    if (pos.empty()) throw InsufficientData("ccdf_loglog: no positive observations");
    if (n_points < 2) throw InsufficientData("ccdf_loglog: need at least two grid points");
    std::sort(pos.begin(), pos.end());
    const double n = static_cast<double>(sample.size());
    const double lx0 = std::log(pos.front());
    const double lx1 = std::log(pos.back());
    std::vector<CcdfPoint> out;
    for (int i = 0; i < n_points; ++i) {
        const double lx = lx0 + (lx1 - lx0) * i / (n_points - 1);
        const double x = std::exp(lx);
        const auto above = static_cast<double>(pos.end() - std::upper_bound(pos.begin(), pos.end(), x));
        if (above <= 0.0) break;  // log(0) is not representable
        out.push_back({lx, std::log(above / n)});
    }
    return out;
}

double ccdf_slope(const std::vector<CcdfPoint>& table) {
    if (table.size() < 2) throw InsufficientData("ccdf_slope: need at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& p : table) {
        sx += p.log_x;
        sy += p.log_ccdf;
        sxx += p.log_x * p.log_x;
        sxy += p.log_x * p.log_ccdf;
    }
    const double n = static_cast<double>(table.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_ccdf_csv(std::ostream& os, const std::vector<CcdfPoint>& table) {
    const auto old = os.precision(17);
    os << "log_x,log_ccdf\n";
    for (const auto& p : table) os << p.log_x << ',' << p.log_ccdf << '\n';
    os.precision(old);
}

}  // namespace wealth
