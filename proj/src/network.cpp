#include "wealth/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "wealth/errors.hpp"
#include "wealth/rng.hpp"

namespace wealth {

namespace {

constexpr double kRowSumTol = 1e-12;

// Streams used by the network builders; kept apart from simulation streams.
constexpr std::uint32_t kStreamTheta = 101;
constexpr std::uint32_t kStreamPhi = 102;
constexpr std::uint32_t kStreamRelabel = 103;

SparseRows from_supports(int n_firms, const std::vector<std::vector<int>>& supports) {
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t i = 0; i < supports.size(); ++i) {
        const double w = 1.0 / static_cast<double>(supports[i].size());
        for (int j : supports[i]) trips.emplace_back(static_cast<int>(i), j, w);
    }
    SparseRows m(static_cast<int>(supports.size()), n_firms);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    return m;
}

Allocation allocation_from_supports(int n_households, int n_firms, const std::vector<std::vector<int>>& supports) {
    const bool all_full = std::all_of(supports.begin(), supports.end(),
                                      [&](const auto& s) { return static_cast<int>(s.size()) == n_firms; });
    if (all_full) return Allocation::uniform(n_households, n_firms);
    return Allocation::sparse(from_supports(n_firms, supports));
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

// Configuration-model pairing of household stubs with firm stubs. Stubs are
// first dealt round-robin over a random firm order (distinct firms per
// household, in-degrees within one of each other), then mixed with
// degree-preserving double-edge swaps that never create repeated pairs.
std::vector<std::vector<int>> random_supports(int n_firms, const std::vector<int>& degrees,
                                              rng::PhiloxEngine& engine) {
    const int n = static_cast<int>(degrees.size());
    std::vector<int> firm_order(n_firms);
    std::iota(firm_order.begin(), firm_order.end(), 0);
    rng::shuffle(firm_order.begin(), firm_order.end(), engine);
    std::vector<int> household_order(n);
    std::iota(household_order.begin(), household_order.end(), 0);
    rng::shuffle(household_order.begin(), household_order.end(), engine);

    std::vector<std::vector<int>> supports(n);
    std::int64_t cursor = 0;
    for (int h : household_order) {
        supports[h].reserve(degrees[h]);
        for (int k = 0; k < degrees[h]; ++k) supports[h].push_back(firm_order[(cursor++) % n_firms]);
    }

    struct Edge {
        int household;
        int slot;
    };
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(cursor));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < degrees[i]; ++k) edges.push_back({i, k});

    const std::uint64_t n_edges = edges.size();
    const std::uint64_t attempts = 10 * n_edges;
    for (std::uint64_t t = 0; t < attempts && n_edges > 1; ++t) {
        const Edge e1 = edges[engine.below(n_edges)];
        const Edge e2 = edges[engine.below(n_edges)];
        if (e1.household == e2.household) continue;
        int& j1 = supports[e1.household][e1.slot];
        int& j2 = supports[e2.household][e2.slot];
        if (j1 == j2) continue;
        if (contains(supports[e1.household], j2) || contains(supports[e2.household], j1)) continue;
        std::swap(j1, j2);
    }
    for (auto& s : supports) std::sort(s.begin(), s.end());
    return supports;
}

void check_degree(int n_households, int n_firms, int d, const char* name, bool balanced) {
    std::ostringstream os;
    if (d < 1 || d > n_firms) {
        os << name << "=" << d << " must lie in [1, F=" << n_firms << "]";
        throw InfeasibleNetwork(os.str());
    }
    if (balanced && (static_cast<std::int64_t>(n_households) * d) % n_firms != 0) {
        os << "N*" << name << " = " << static_cast<std::int64_t>(n_households) * d
           << " is not divisible by F=" << n_firms << "; firm in-degrees cannot be balanced";
        throw InfeasibleNetwork(os.str());
    }
}

void check_sizes(int n_households, int n_firms) {
    if (n_households < 1 || n_firms < 1) throw InfeasibleNetwork("network needs N >= 1 and F >= 1");
}

}  // namespace

// ---------------------------------------------------------------------------
// Allocation

Allocation Allocation::uniform(int n_households, int n_firms) {
    check_sizes(n_households, n_firms);
    Allocation a;
    a.rows_ = n_households;
    a.cols_ = n_firms;
    a.uniform_ = true;
    return a;
}

Allocation Allocation::sparse(SparseRows m) {
    m.makeCompressed();
    for (int i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (SparseRows::InnerIterator it(m, i); it; ++it) {
            if (!(it.value() >= 0.0 && it.value() <= 1.0)) {
                std::ostringstream os;
                os << "allocation entry (" << i << "," << it.col() << ") = " << it.value() << " outside [0,1]";
                throw InvalidNetwork(os.str());
            }
            sum += it.value();
        }
        if (std::abs(sum - 1.0) > kRowSumTol) {
            std::ostringstream os;
            os << std::setprecision(17) << "allocation row " << i << " sums to " << sum << ", expected 1";
            throw InvalidNetwork(os.str());
        }
    }
    Allocation a;
    a.rows_ = static_cast<int>(m.rows());
    a.cols_ = static_cast<int>(m.cols());
    a.m_ = std::move(m);
    return a;
}

std::int64_t Allocation::nonzeros() const noexcept {
    return uniform_ ? static_cast<std::int64_t>(rows_) * cols_ : m_.nonZeros();
}

int Allocation::degree(int i) const {
    if (uniform_) return cols_;
    return m_.outerIndexPtr()[i + 1] - m_.outerIndexPtr()[i];
}

double Allocation::row_dot(int i, std::span<const double> x) const {
    if (uniform_) {
        double sum = 0.0;
        for (double v : x) sum += v;
        return sum / cols_;
    }
    double sum = 0.0;
    for (SparseRows::InnerIterator it(m_, i); it; ++it) sum += it.value() * x[it.col()];
    return sum;
}

void Allocation::transpose_times(std::span<const double> y, std::span<double> out) const {
    if (static_cast<int>(y.size()) != rows_ || static_cast<int>(out.size()) != cols_)
        throw DimensionMismatch("transpose_times: size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    if (uniform_) {
        double sum = 0.0;
        for (double v : y) sum += v;
        std::fill(out.begin(), out.end(), sum / cols_);
        return;
    }
    for (int i = 0; i < rows_; ++i)
        for (SparseRows::InnerIterator it(m_, i); it; ++it) out[it.col()] += it.value() * y[i];
}

double Allocation::row_square_norm(int i) const {
    if (uniform_) return 1.0 / cols_;
    double sum = 0.0;
    for (SparseRows::InnerIterator it(m_, i); it; ++it) sum += it.value() * it.value();
    return sum;
}

SparseRows Allocation::materialize() const {
    if (!uniform_) return m_;
    SparseRows m(rows_, cols_);
    m.reserve(Eigen::VectorXi::Constant(rows_, cols_));
    const double w = 1.0 / cols_;
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) m.insert(i, j) = w;
    m.makeCompressed();
    return m;
}

// ---------------------------------------------------------------------------
// AllocationNetwork

AllocationNetwork::AllocationNetwork(Allocation theta, Allocation phi) : theta_(std::move(theta)), phi_(std::move(phi)) {
    if (theta_.rows() != phi_.rows() || theta_.cols() != phi_.cols())
        throw DimensionMismatch("theta and phi must both be N x F");
}

double AllocationNetwork::max_firm_wealth_share() const {
    std::vector<double> ones(n_households(), 1.0);
    std::vector<double> cols(n_firms());
    theta_.transpose_times(ones, cols);
    return *std::max_element(cols.begin(), cols.end());
}

AllocationNetwork build_regular(int n_households, int n_firms, int d_theta, int d_phi, std::uint64_t seed) {
    check_sizes(n_households, n_firms);
    check_degree(n_households, n_firms, d_theta, "d_theta", true);
    check_degree(n_households, n_firms, d_phi, "d_phi", true);
    rng::PhiloxEngine theta_engine(seed, kStreamTheta);
    rng::PhiloxEngine phi_engine(seed, kStreamPhi);
    const auto theta = random_supports(n_firms, std::vector<int>(n_households, d_theta), theta_engine);
    const auto phi = random_supports(n_firms, std::vector<int>(n_households, d_phi), phi_engine);
    return {allocation_from_supports(n_households, n_firms, theta),
            allocation_from_supports(n_households, n_firms, phi)};
}

AllocationNetwork build_shared_support(int n_households, int n_firms, int degree, std::uint64_t seed) {
    check_sizes(n_households, n_firms);
    check_degree(n_households, n_firms, degree, "degree", true);
    rng::PhiloxEngine engine(seed, kStreamTheta);
    const auto supports = random_supports(n_firms, std::vector<int>(n_households, degree), engine);
    return {allocation_from_supports(n_households, n_firms, supports),
            allocation_from_supports(n_households, n_firms, supports)};
}

AllocationNetwork build_ring(int n_households, int n_firms, int d_theta, int d_phi, int labour_offset,
                             std::uint64_t seed) {
    check_sizes(n_households, n_firms);
    check_degree(n_households, n_firms, d_theta, "d_theta", false);
    check_degree(n_households, n_firms, d_phi, "d_phi", false);
    if (n_households % n_firms != 0) throw InfeasibleNetwork("ring network requires N divisible by F");
    if (labour_offset < 0) throw InfeasibleNetwork("ring labour offset must be >= 0");
    rng::PhiloxEngine engine(seed, kStreamRelabel);
    std::vector<int> label(n_firms);
    std::iota(label.begin(), label.end(), 0);
    rng::shuffle(label.begin(), label.end(), engine);
    std::vector<std::vector<int>> theta(n_households), phi(n_households);
    for (int i = 0; i < n_households; ++i) {
        const int base = i % n_firms;
        for (int k = 0; k < d_theta; ++k) theta[i].push_back(label[(base + k) % n_firms]);
        for (int k = 0; k < d_phi; ++k) phi[i].push_back(label[(base + labour_offset + k) % n_firms]);
        std::sort(theta[i].begin(), theta[i].end());
        std::sort(phi[i].begin(), phi[i].end());
    }
    return {allocation_from_supports(n_households, n_firms, theta),
            allocation_from_supports(n_households, n_firms, phi)};
}

AllocationNetwork build_heterogeneous(int n_households, int n_firms, const std::vector<int>& d_theta, int d_phi,
                                      std::uint64_t seed) {
    check_sizes(n_households, n_firms);
    if (static_cast<int>(d_theta.size()) != n_households)
        throw DimensionMismatch("build_heterogeneous: one d_theta per household required");
    for (int d : d_theta) check_degree(n_households, n_firms, d, "d_theta[i]", false);
    check_degree(n_households, n_firms, d_phi, "d_phi", false);
    rng::PhiloxEngine theta_engine(seed, kStreamTheta);
    rng::PhiloxEngine phi_engine(seed, kStreamPhi);
    const auto theta = random_supports(n_firms, d_theta, theta_engine);
    const auto phi = random_supports(n_firms, std::vector<int>(n_households, d_phi), phi_engine);
    return {allocation_from_supports(n_households, n_firms, theta),
            allocation_from_supports(n_households, n_firms, phi)};
}

// ---------------------------------------------------------------------------
// Overlaps and firm inputs

OverlapStats overlap_matrices(const AllocationNetwork& net) {
    const SparseRows theta = net.theta().materialize();
    const SparseRows phi = net.phi().materialize();
    OverlapStats out;
    out.Theta = SparseRows(theta * SparseRows(theta.transpose()));
    out.Omega = SparseRows(theta * SparseRows(phi.transpose()));
    out.Phi = SparseRows(phi * SparseRows(phi.transpose()));
    const DiagonalMeans d = diagonal_means(net);
    out.theta_bar = d.theta_bar;
    out.omega_bar = d.omega_bar;
    out.phi_bar = d.phi_bar;
    return out;
}

DiagonalMeans diagonal_means(const AllocationNetwork& net, bool idiosyncratic_only) {
    const int n = net.n_households();
    const Allocation& th = net.theta();
    const Allocation& ph = net.phi();
    double st = 0.0, so = 0.0, sp = 0.0;
    for (int i = 0; i < n; ++i) {
        st += th.row_square_norm(i);
        sp += ph.row_square_norm(i);
        // Omega_ii = sum_j theta_ij phi_ij
        if (th.is_uniform()) {
            so += 1.0 / th.cols();
        } else if (ph.is_uniform()) {
            so += 1.0 / ph.cols();
        } else {
            SparseRows::InnerIterator a(th.matrix(), i), b(ph.matrix(), i);
            while (a && b) {
                if (a.col() == b.col()) {
                    so += a.value() * b.value();
                    ++a;
                    ++b;
                } else if (a.col() < b.col()) {
                    ++a;
                } else {
                    ++b;
                }
            }
        }
    }
    DiagonalMeans d{st / n, so / n, sp / n};
    if (idiosyncratic_only) {
        const double shift = 1.0 / net.n_firms();
        d.theta_bar -= shift;
        d.omega_bar -= shift;
        d.phi_bar -= shift;
    }
    return d;
}

FirmInputs firm_inputs(const AllocationNetwork& net, std::span<const double> wealth) {
    if (static_cast<int>(wealth.size()) != net.n_households()) {
        std::ostringstream os;
        os << "firm_inputs: wealth has " << wealth.size() << " entries, network has " << net.n_households()
           << " households";
        throw DimensionMismatch(os.str());
    }
    FirmInputs out{std::vector<double>(net.n_firms()), std::vector<double>(net.n_firms())};
    net.theta().transpose_times(wealth, out.capital);
    const std::vector<double> ones(net.n_households(), 1.0);
    net.phi().transpose_times(ones, out.labour);
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_allocation(std::ostream& os, const Allocation& a) {
    if (a.is_uniform()) {
        const double w = 1.0 / a.cols();
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) os << i << ' ' << j << ' ' << w << '\n';
        return;
    }
    for (int i = 0; i < a.rows(); ++i)
        for (SparseRows::InnerIterator it(a.matrix(), i); it; ++it) os << i << ' ' << it.col() << ' ' << it.value() << '\n';
}

std::vector<std::string> allocation_violations(int n, int f, const std::vector<Triplet>& trips, const char* name) {
    std::vector<std::string> out;
    std::vector<double> row_sum(n > 0 ? n : 0, 0.0);
    std::vector<std::pair<int, int>> seen;
    seen.reserve(trips.size());
    for (const Triplet& t : trips) {
        std::ostringstream os;
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= f) {
            os << name << " entry (" << t.row << "," << t.col << ") out of bounds";
            out.push_back(os.str());
            continue;
        }
        if (!(t.weight >= 0.0 && t.weight <= 1.0)) {
            os << name << " entry (" << t.row << "," << t.col << ") weight " << t.weight << " outside [0,1]";
            out.push_back(os.str());
        }
        row_sum[t.row] += t.weight;
        seen.emplace_back(t.row, t.col);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        out.push_back(std::string(name) + " has duplicate entries");
    for (int i = 0; i < n; ++i) {
        if (std::abs(row_sum[i] - 1.0) > kRowSumTol) {
            std::ostringstream os;
            os << std::setprecision(17) << name << " row " << i << " sums to " << row_sum[i];
            out.push_back(os.str());
        }
    }
    return out;
}

Allocation allocation_from_triplets(int n, int f, const std::vector<Triplet>& trips) {
    if (static_cast<std::int64_t>(trips.size()) == static_cast<std::int64_t>(n) * f) {
        const double w = 1.0 / f;
        if (std::all_of(trips.begin(), trips.end(), [&](const Triplet& t) { return t.weight == w; }))
            return Allocation::uniform(n, f);
    }
    std::vector<Eigen::Triplet<double>> et;
    et.reserve(trips.size());
    for (const Triplet& t : trips) et.emplace_back(t.row, t.col, t.weight);
    SparseRows m(n, f);
    m.setFromTriplets(et.begin(), et.end());
    return Allocation::sparse(std::move(m));
}

}  // namespace

void write_network(std::ostream& os, const AllocationNetwork& net) {
    const auto old_precision = os.precision(17);
    os << net.n_households() << ' ' << net.n_firms() << ' ' << net.theta().nonzeros() << ' '
       << net.phi().nonzeros() << '\n';
    write_allocation(os, net.theta());
    write_allocation(os, net.phi());
    os.precision(old_precision);
}

void write_network(const std::string& path, const AllocationNetwork& net) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_network(os, net);
}

NetworkFile parse_network(std::istream& is) {
    NetworkFile file;
    std::int64_t nnz_theta = 0, nnz_phi = 0;
    if (!(is >> file.n_households >> file.n_firms >> nnz_theta >> nnz_phi))
        throw InvalidNetwork("network file: malformed header, expected 'N F nnz_theta nnz_phi'");
    if (file.n_households < 1 || file.n_firms < 1 || nnz_theta < 0 || nnz_phi < 0)
        throw InvalidNetwork("network file: header values out of range");
    auto read_block = [&](std::int64_t count, std::vector<Triplet>& out, const char* name) {
        out.reserve(static_cast<std::size_t>(count));
        for (std::int64_t k = 0; k < count; ++k) {
            Triplet t{};
            if (!(is >> t.row >> t.col >> t.weight)) {
                std::ostringstream os;
                os << "network file: " << name << " triplet " << k << " of " << count << " unreadable";
                throw InvalidNetwork(os.str());
            }
            out.push_back(t);
        }
    };
    read_block(nnz_theta, file.theta, "theta");
    read_block(nnz_phi, file.phi, "phi");
    std::string trailing;
    if (is >> trailing) throw InvalidNetwork("network file: trailing content after declared triplets");
    return file;
}

std::vector<std::string> network_violations(const NetworkFile& file) {
    auto out = allocation_violations(file.n_households, file.n_firms, file.theta, "theta");
    auto phi = allocation_violations(file.n_households, file.n_firms, file.phi, "phi");
    out.insert(out.end(), phi.begin(), phi.end());
    return out;
}

AllocationNetwork read_network(std::istream& is) {
    const NetworkFile file = parse_network(is);
    const auto violations = network_violations(file);
    if (!violations.empty()) {
        std::string msg = "network file violates invariants:";
        for (std::size_t k = 0; k < violations.size() && k < 5; ++k) msg += " " + violations[k] + ";";
        throw InvalidNetwork(msg);
    }
    return {allocation_from_triplets(file.n_households, file.n_firms, file.theta),
            allocation_from_triplets(file.n_households, file.n_firms, file.phi)};
}

AllocationNetwork read_network(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidNetwork("cannot open network file " + path);
    return read_network(is);
}

}  // namespace wealth
