#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bethe/graph.hpp"

namespace bethe {

/// Indexed by x_i in {0, 1}.
using NodeTable = std::array<double, 2>;
/// Indexed by 2*x_i + x_j: (0,0), (0,1), (1,0), (1,1), where i < j is the
/// canonical edge orientation.
using EdgeTable = std::array<double, 4>;

inline constexpr double kInteriorEps = 1e-9;

/// Log-potentials theta_i(x_i), theta_ij(x_i, x_j).
struct TablePotentials {
  std::vector<NodeTable> node;
  std::vector<EdgeTable> edge;

  static TablePotentials zeros(const Graph& g);
};

/// Spin form: exponent sum_i h_i s_i + sum_ij J_ij s_i s_j with s = 2x - 1.
struct IsingPotentials {
  std::vector<double> field;
  std::vector<double> coupling;
};

/// mu_i = P(x_i = 1), mu_ij = P(x_i = 1, x_j = 1).
struct MinimalMarginals {
  std::vector<double> node;
  std::vector<double> edge;
};

struct TableMarginals {
  std::vector<NodeTable> node;
  std::vector<EdgeTable> edge;
};

/// Every node mu_v, every edge mu_e. Requires 0 < mu_v < 1 and
/// max(0, 2 mu_v - 1) <= mu_e <= mu_v; throws PolytopeError naming the
/// violated inequality.
MinimalMarginals homogeneous_marginals(const Graph& g, double mu_v, double mu_e);

/// First violated local-polytope inequality (slack below -tol), if any.
std::optional<std::string> local_polytope_violation(const MinimalMarginals& mu, const Graph& g,
                                                    double tol);
bool in_local_polytope(const MinimalMarginals& mu, const Graph& g, double tol);

/// Edge table of (mu_i, mu_j, mu_ij).
EdgeTable edge_table(double mu_i, double mu_j, double mu_ij) noexcept;

TableMarginals to_table(const MinimalMarginals& mu, const Graph& g);
/// Requires normalized, nonnegative, locally consistent tables (within 1e-9).
MinimalMarginals to_minimal(const TableMarginals& mu, const Graph& g);

/// Smallest entry across all node and edge tables.
double min_table_entry(const MinimalMarginals& mu, const Graph& g);

/// theta_i = log mu_i(x_i), theta_ij = log mu_ij / (mu_i mu_j).
/// Throws PolytopeError if any table entry is below kInteriorEps.
TablePotentials canonical_parameters(const MinimalMarginals& mu, const Graph& g);

/// Exact reparameterization: p(x; theta) and p(x; ising_to_table(...)) agree.
IsingPotentials table_to_ising(const TablePotentials& theta, const Graph& g);
TablePotentials ising_to_table(const IsingPotentials& ising, const Graph& g);

/// Full-table inner product mu . theta.
double dot(const TableMarginals& mu, const TablePotentials& theta);

/// L-infinity distance over all table entries.
double max_abs_diff(const TableMarginals& a, const TableMarginals& b);

/// (mu_v, mu_e) if every node and edge entry agrees within tol.
std::optional<std::pair<double, double>> homogeneous_values(const MinimalMarginals& mu,
                                                            double tol = 1e-12);

void check_sizes(const TablePotentials& theta, const Graph& g);
void check_sizes(const MinimalMarginals& mu, const Graph& g);
void check_sizes(const TableMarginals& mu, const Graph& g);
void check_finite(const TablePotentials& theta);

}  // namespace bethe
