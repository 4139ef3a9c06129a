#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bethe/graph.hpp"
#include "bethe/model.hpp"

namespace bethe {

enum class MessageInit { uniform, random };

struct BPOptions {
  int max_iter = 10000;
  /// Converged once the undamped update moves no message entry by more than tol.
  double tol = 1e-10;
  /// Fraction of the old message kept at each synchronous sweep.
  double damping = 0.5;
  MessageInit init = MessageInit::uniform;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Normalized message over the receiving node's state.
using Message = std::array<double, 2>;

/// Directed edge ids: 2e is u -> v and 2e + 1 is v -> u for edge e = (u, v).
inline constexpr int directed_edge(int e, bool reverse) noexcept { return 2 * e + (reverse ? 1 : 0); }

struct BPResult {
  TableMarginals beliefs;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::vector<Message> messages;
};

/// Synchronous damped sum-product. `initial`, when non-empty, overrides
/// opts.init and must hold 2 * N_E messages. Non-convergence is reported via
/// BPResult::converged; NaN in the messages throws NumericalError.
BPResult sum_product(const TablePotentials& theta, const Graph& g, const BPOptions& opts,
                     std::span<const Message> initial = {});

/// Beliefs implied by a message set.
TableMarginals beliefs_from_messages(const TablePotentials& theta, const Graph& g,
                                     std::span<const Message> messages);

/// Largest entry change of one undamped synchronous update applied to `messages`.
double fixed_point_residual(const TablePotentials& theta, const Graph& g,
                            std::span<const Message> messages);

inline constexpr double kDedupeTol = 1e-4;

struct FixedPoint {
  TableMarginals beliefs;
  std::vector<Message> messages;
  double free_energy = 0.0;
  /// 0 is the uniform-init run; k > 0 are random inits.
  int run = 0;
};

struct RestartResult {
  /// Distinct converged fixed points, F descending (ties by run index).
  std::vector<FixedPoint> fixed_points;
  /// Final residual of every run, indexed by run.
  std::vector<double> residuals;
  int converged_runs = 0;
};

/// Run 0 starts from uniform messages, runs 1..n_restarts-1 from random
/// messages seeded by (seed, run).
RestartResult multi_restart_bp(const TablePotentials& theta, const Graph& g, int n_restarts,
                               std::uint64_t seed, const BPOptions& opts);

/// sum_i (d_i - 1) sum_x mu_i log mu_i - sum_ij sum_x mu_ij log mu_ij, with
/// 0 log 0 = 0. Equals the exact entropy on trees.
double bethe_entropy(const TableMarginals& mu, const Graph& g);
double bethe_entropy(const MinimalMarginals& mu, const Graph& g);

/// F(mu; theta) = mu . theta + H_B(mu).
double bethe_free_energy(const TableMarginals& mu, const TablePotentials& theta, const Graph& g);
double bethe_free_energy(const MinimalMarginals& mu, const TablePotentials& theta, const Graph& g);

struct BetheLogPartition {
  double value = 0.0;
  /// Always true: the maximum is over BP fixed points found, a lower bound on
  /// the true maximum of F over the local polytope.
  bool approximate = true;
  int fixed_points = 0;
};

/// Max of F over the fixed points found by multi_restart_bp. Throws
/// ConvergenceError when no run converged.
BetheLogPartition bethe_log_partition(const TablePotentials& theta, const Graph& g,
                                      const BPOptions& opts, int n_restarts, std::uint64_t seed = 0);

inline constexpr int kMaxExactNodes = 24;

struct ExactResult {
  double log_partition = 0.0;
  TableMarginals marginals;
};

/// Brute-force enumeration over all 2^N_V assignments.
ExactResult exact_inference(const TablePotentials& theta, const Graph& g);

}  // namespace bethe
