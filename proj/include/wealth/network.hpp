#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wealth {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// One N x F row-stochastic allocation (investment theta or labour phi).
/// Full diversification (every entry 1/F) is kept implicit so that large
/// complete-market economies cost O(N) instead of O(N F).
class Allocation {
public:
    static Allocation uniform(int n_households, int n_firms);
    /// Takes ownership of `m`; throws InvalidNetwork unless rows sum to 1
    /// (within 1e-12) and entries lie in [0, 1].
    static Allocation sparse(SparseRows m);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool is_uniform() const noexcept { return uniform_; }
    std::int64_t nonzeros() const noexcept;

    /// sum_j w_ij x_j for household i.
    double row_dot(int i, std::span<const double> firm_values) const;
    /// out_j = sum_i w_ij y_i; accumulated in household order.
    void transpose_times(std::span<const double> household_values, std::span<double> out) const;
    /// sum_j w_ij^2 for household i.
    double row_square_norm(int i) const;
    /// Explicit sparse form (N*F entries for a uniform allocation).
    SparseRows materialize() const;
    const SparseRows& matrix() const noexcept { return m_; }

    /// Number of firms in household i's support.
    int degree(int i) const;

private:
    Allocation() = default;
    int rows_ = 0;
    int cols_ = 0;
    bool uniform_ = false;
    SparseRows m_;
};

/// Bipartite household-firm structure: who invests where (theta) and who works where (phi).
class AllocationNetwork {
public:
    AllocationNetwork(Allocation theta, Allocation phi);

    int n_households() const noexcept { return theta_.rows(); }
    int n_firms() const noexcept { return theta_.cols(); }
    /// F / N as recorded at build time.
    double firms_per_household() const noexcept {
        return static_cast<double>(n_firms()) / n_households();
    }
    const Allocation& theta() const noexcept { return theta_; }
    const Allocation& phi() const noexcept { return phi_; }

    /// max_j sum_i theta_ij, the column-sum bound the infinite-economy limit relies on.
    double max_firm_wealth_share() const;

private:
    Allocation theta_;
    Allocation phi_;
};

/// Balanced random bipartite configuration model. Each household spreads
/// wealth evenly over d_theta distinct firms and labour over d_phi distinct
/// firms; all firms end up with the same in-degree. Deterministic in `seed`.
/// Throws InfeasibleNetwork unless 1 <= d <= F and N*d is divisible by F.
AllocationNetwork build_regular(int n_households, int n_firms, int d_theta, int d_phi, std::uint64_t seed);

/// Like build_regular but every household's labour support equals its
/// investment support (d_theta == d_phi, Omega_ii = Theta_ii = Phi_ii).
AllocationNetwork build_shared_support(int n_households, int n_firms, int degree, std::uint64_t seed);

/// Structured ring: household i invests in firms base_i .. base_i + d_theta - 1
/// and works in base_i + offset .. base_i + offset + d_phi - 1 (mod F), with
/// base_i = i mod F, under a random relabelling of firms. Gives homogeneous
/// Omega_ii = overlap / (d_theta d_phi). Requires N divisible by F.
AllocationNetwork build_ring(int n_households, int n_firms, int d_theta, int d_phi, int labour_offset,
                             std::uint64_t seed);

/// Heterogeneous portfolio diversification: household i invests in
/// d_theta[i] firms. Firm in-degrees differ by at most one.
AllocationNetwork build_heterogeneous(int n_households, int n_firms, const std::vector<int>& d_theta, int d_phi,
                                      std::uint64_t seed);

struct OverlapStats {
    SparseRows Theta;  // theta theta^T
    SparseRows Omega;  // theta phi^T
    SparseRows Phi;    // phi phi^T
    double theta_bar = 0.0;
    double omega_bar = 0.0;
    double phi_bar = 0.0;
};

/// Exact sparse products. Memory is O(N^2) for dense overlaps; use
/// diagonal_means() for large economies.
OverlapStats overlap_matrices(const AllocationNetwork& net);

struct DiagonalMeans {
    double theta_bar = 0.0;
    double omega_bar = 0.0;
    double phi_bar = 0.0;
};

/// Means of diag(Theta), diag(Omega), diag(Phi) in O(nnz).
/// With `idiosyncratic_only` the firm shocks are taken net of their
/// cross-firm average, which lowers every overlap by exactly 1/F.
DiagonalMeans diagonal_means(const AllocationNetwork& net, bool idiosyncratic_only = false);

struct FirmInputs {
    std::vector<double> capital;  // k_j
    std::vector<double> labour;   // l_j
};

/// k_j = sum_i theta_ij p_i,  l_j = sum_i phi_ij.
FirmInputs firm_inputs(const AllocationNetwork& net, std::span<const double> wealth);

// Sparse triplet text format:
//   N F nnz_theta nnz_phi
//   i j w        (nnz_theta lines, 0-based)
//   i j w        (nnz_phi lines)
// Weights are written with 17 significant digits, so a round trip is exact.

void write_network(std::ostream& os, const AllocationNetwork& net);
void write_network(const std::string& path, const AllocationNetwork& net);

struct Triplet {
    int row;
    int col;
    double weight;
};

struct NetworkFile {
    int n_households = 0;
    int n_firms = 0;
    std::vector<Triplet> theta;
    std::vector<Triplet> phi;
};

/// Syntax-level parse; throws InvalidNetwork on malformed input.
NetworkFile parse_network(std::istream& is);
/// Every violated invariant (bounds, duplicates, row sums, entry range).
std::vector<std::string> network_violations(const NetworkFile& file);
/// Parse + validate + build; throws InvalidNetwork on any violation.
AllocationNetwork read_network(std::istream& is);
AllocationNetwork read_network(const std::string& path);

}  // namespace wealth
