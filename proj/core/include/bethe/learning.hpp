#pragma once

#include <cstdint>
#include <vector>

#include "bethe/graph.hpp"
#include "bethe/inference.hpp"
#include "bethe/model.hpp"

namespace bethe {

/// ell_B(theta; mu_bar) = mu_bar . theta - F(theta), with F(theta) from
/// multi-restart BP. Since F(theta) is a lower bound, the value is an upper
/// estimate of the true Bethe likelihood.
double bethe_likelihood(const TablePotentials& theta, const MinimalMarginals& mu_bar, const Graph& g,
                        const BPOptions& bp, int n_restarts, std::uint64_t seed = 0);

enum class StepSchedule { constant, inv_sqrt };
enum class LearnStatus { matched, stalled, max_iter };

const char* to_string(LearnStatus s) noexcept;

struct LearnOptions {
  double step0 = 0.1;
  StepSchedule schedule = StepSchedule::inv_sqrt;
  int max_iter = 500;
  double match_tol = 0.01;
  BPOptions bp;
  bool warm_start = true;
  int restarts = 20;
  std::uint64_t seed = 0;
  /// With warm starts on, every this-many iterations use a cold multi-restart.
  int cold_restart_every = 25;
  /// Stop as stalled after this many iterations without a new best residual.
  int stall_window = 100;

  void validate() const;
};

struct LearnRecord {
  int iteration = 0;
  double likelihood = 0.0;
  /// L-infinity distance between mu_bar and the BP beliefs, over table entries.
  double residual = 0.0;
};

struct LearnTrace {
  std::vector<LearnRecord> records;
  /// Parameters of the last evaluated iterate.
  TablePotentials theta;
  LearnStatus status = LearnStatus::max_iter;

  double final_residual() const { return records.empty() ? 0.0 : records.back().residual; }
};

/// Subgradient ascent on ell_B from theta^c(mu_bar), stepping along
/// mu_bar - mu_BP(theta_t) in full-table coordinates.
LearnTrace learn_subgradient(const MinimalMarginals& mu_bar, const Graph& g, const LearnOptions& opts);

inline constexpr double kFreeEnergyTieTol = 1e-6;

struct MatchResult {
  bool matched = false;
  double residual = 0.0;
  /// No other found fixed point has F within kFreeEnergyTieTol of the top one.
  bool unique_top = false;
  int fixed_points = 0;
};

/// Compares mu_bar against the top-F fixed point of multi-restart BP on theta.
MatchResult moment_matching_check(const TablePotentials& theta, const MinimalMarginals& mu_bar,
                                  const Graph& g, double tol, const BPOptions& bp, int n_restarts,
                                  std::uint64_t seed = 0);

// --- Homogeneous oracle -----------------------------------------------------
//
// For homogeneous spin parameters (field h on every node, coupling J on every
// edge) and homogeneous marginals (mu_v, mu_e), F depends on the graph only
// through N_V and N_E.

double homogeneous_bethe_entropy(int num_nodes, int num_edges, double mu_v, double mu_e);
double homogeneous_free_energy(int num_nodes, int num_edges, double h, double J, double mu_v, double mu_e);
/// mu_bar . theta for the homogeneous case.
double homogeneous_moment(int num_nodes, int num_edges, double h, double J, double mu_v, double mu_e);

struct GridPoint {
  double mu_v = 0.0;
  double mu_e = 0.0;
  double free_energy = 0.0;
};

/// Every point (mu_v, mu_e) = (k/n, m/n), n = 1/resolution, in the closed
/// homogeneous polytope, row-major in (mu_v, mu_e). Resolution must lie in
/// (0, 0.05] and divide 1.
std::vector<GridPoint> homogeneous_surface(const Graph& g, double h, double J, double resolution);

struct GridArgmax {
  /// Grid-local maxima over the 8-neighborhood, F descending.
  std::vector<GridPoint> local_maxima;
  GridPoint global;
};

GridArgmax homogeneous_grid_argmax(const Graph& g, double h, double J, double resolution);

/// mu_bar . theta - max over the grid of F: the likelihood with the inner
/// maximization done by the grid oracle. Concave in (h, J).
double homogeneous_grid_likelihood(const Graph& g, double h, double J, double mu_v, double mu_e,
                                   double resolution);

struct Figure1Options {
  double h_min = -1.0;
  double h_max = 1.0;
  double j_min = 0.0;
  double j_max = 1.5;
  double theta_resolution = 0.01;
  double mu_resolution = 0.002;
  double f_tol = 1e-6;
  double hull_tol = 0.02;
};

struct Figure1Result {
  double h = 0.0;
  double J = 0.0;
  double likelihood = 0.0;
  /// Global maxima of F(.; theta_B) within f_tol of the best.
  std::vector<GridPoint> maximizers;
  double hull_distance = 0.0;
  bool hull_contains_mu = false;
  double f_at_mu = 0.0;
  double f_max = 0.0;
};

/// Exhaustive search over the homogeneous (h, J) grid for the Bethe-likelihood
/// maximizer, then the maximizer set of F at that parameter and whether
/// mu_bar lies in its convex hull.
Figure1Result figure1_search(double mu_v, double mu_e, const Graph& g, const Figure1Options& opts = {});

}  // namespace bethe
