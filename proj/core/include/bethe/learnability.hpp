#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bethe/graph.hpp"
#include "bethe/inference.hpp"
#include "bethe/learning.hpp"
#include "bethe/model.hpp"

namespace bethe {

/// Symmetric, dimension N_V + N_E: node coordinates first, then edges in
/// canonical order.
using HessianMatrix = Eigen::MatrixXd;

/// Hessian of H_B in minimal coordinates (mu_i, mu_ij). Requires every table
/// entry >= kInteriorEps.
HessianMatrix bethe_entropy_hessian(const MinimalMarginals& mu, const Graph& g);

/// The distinct Hessian values for homogeneous marginals.
struct HomogeneousHessian {
  double a_hat = 0.0;  // 1/mu_v + 1/(1 - mu_v)
  double b = 0.0;      // node-node, adjacent
  double c = 0.0;      // node-edge, incident
  double d = 0.0;      // edge diagonal

  double a(int degree) const noexcept { return (degree - 1) * a_hat - degree * c; }
};

HomogeneousHessian homogeneous_hessian_values(double mu_v, double mu_e);

/// Assembles the Hessian from HomogeneousHessian by sparsity pattern alone,
/// independent of bethe_entropy_hessian.
HessianMatrix homogeneous_hessian(const Graph& g, double mu_v, double mu_e);

inline constexpr double kEigTol = 1e-9;
inline constexpr double kLemma1Margin = 1e-6;
/// lemma3_test fires only when lhs exceeds this; grid points on the boundary
/// evaluate to round-off.
inline constexpr double kLemma3Tol = 1e-12;

struct Lemma2Result {
  bool unlearnable = false;
  double max_eigenvalue = 0.0;
};

/// Unlearnable when the Hessian has an eigenvalue above eig_tol.
Lemma2Result lemma2_test(const MinimalMarginals& mu, const Graph& g, double eig_tol = kEigTol);

struct Lemma3Result {
  bool unlearnable = false;
  double lhs = 0.0;
};

/// Closed-form condition for homogeneous marginals:
///   0 < (mu_e - mu_v^2)(1 - N_V/(2 N_E)) - (N_V/(2 N_E)) mu_v (1 - mu_v).
Lemma3Result lemma3_test(int num_nodes, int num_edges, double mu_v, double mu_e, double tol = kLemma3Tol);

/// The mu_e above which lemma3_test fires, or nullopt when no mu_e <= mu_v does.
std::optional<double> lemma3_threshold(int num_nodes, int num_edges, double mu_v);

/// Discriminant form of the same condition, c^2 - d(a_hat - c + b)/2 +
/// (N_V/(4 N_E)) d a_hat; same sign as lemma3_test's lhs on the interior.
double lemma3_discriminant(int num_nodes, int num_edges, double mu_v, double mu_e);

struct Lemma1Result {
  bool unlearnable = false;
  /// F(mu_bar; theta^c(mu_bar)).
  double f_at_mu = 0.0;
  /// Fixed points with F above f_at_mu + margin, F descending.
  std::vector<FixedPoint> witnesses;
  int fixed_points = 0;
  int converged_runs = 0;
};

/// One-sided: `unlearnable == false` means no witness was found.
Lemma1Result lemma1_test(const MinimalMarginals& mu, const Graph& g, const BPOptions& bp, int n_restarts,
                         std::uint64_t seed = 0, double margin = kLemma1Margin);

struct InnerBoundResult {
  bool learnable_certificate = false;
  double spectral_radius = 0.0;
};

/// Spectral radius of the nonbacktracking matrix weighted by tanh|J| (spin
/// couplings). Radius < 1 certifies a unique BP fixed point.
InnerBoundResult inner_bound_unique(const TablePotentials& theta, const Graph& g);

/// Power iteration on the weighted nonbacktracking matrix; throws
/// ConvergenceError after max_iter steps.
double nonbacktracking_spectral_radius(const Graph& g, const std::vector<double>& edge_weights,
                                       int max_iter = 10000);

enum class Status {
  UnlearnableLemma3,
  UnlearnableLemma2,
  UnlearnableLemma1,
  LearnableInnerBound,
  EmpiricalMatch,
  EmpiricalNoMatch,
  Undetermined,
};

const char* to_string(Status s) noexcept;

struct EmpiricalEvidence {
  LearnStatus learn_status = LearnStatus::max_iter;
  int iterations = 0;
  double learn_residual = 0.0;
  MatchResult match;
  /// Set when BP failed during the empirical stage.
  bool failed = false;
};

struct Evidence {
  std::optional<Lemma3Result> lemma3;
  std::optional<Lemma2Result> lemma2;
  std::optional<InnerBoundResult> inner;
  std::optional<Lemma1Result> lemma1;
  std::optional<EmpiricalEvidence> empirical;
};

struct Verdict {
  Status status = Status::Undetermined;
  Evidence evidence;
};

struct ClassifyOptions {
  double eig_tol = kEigTol;
  double lemma1_margin = kLemma1Margin;
  BPOptions bp;
  int restarts = 20;
  std::uint64_t seed = 0;
  /// Run subgradient learning when no bound decides.
  bool empirical = true;
  /// Evaluate every bound even after one has decided.
  bool exhaustive = false;
  LearnOptions learn;
};

/// Bounds in order lemma 3 (homogeneous input only), lemma 2, inner bound,
/// lemma 1, then the empirical stage. The first decisive bound sets the status.
Verdict classify(const MinimalMarginals& mu, const Graph& g, const ClassifyOptions& opts = {});

}  // namespace bethe
