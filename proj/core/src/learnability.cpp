#include "bethe/learnability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bethe/error.hpp"

namespace bethe {

HessianMatrix bethe_entropy_hessian(const MinimalMarginals& mu, const Graph& g) {
  if (min_table_entry(mu, g) < kInteriorEps) {
    throw PolytopeError("bethe_entropy_hessian: marginals must be strictly interior");
  }
  const int nv = g.num_nodes();
  HessianMatrix A = HessianMatrix::Zero(nv + g.num_edges(), nv + g.num_edges());
  for (int i = 0; i < nv; ++i) {
    double m = mu.node[static_cast<std::size_t>(i)];
    A(i, i) = (g.degree(i) - 1) * (1.0 / m + 1.0 / (1.0 - m));
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    double mi = mu.node[static_cast<std::size_t>(ed.u)];
    double mj = mu.node[static_cast<std::size_t>(ed.v)];
    double mij = mu.edge[static_cast<std::size_t>(e)];
    double p11 = mij;
    double p10 = mi - mij;
    double p01 = mj - mij;
    double p00 = 1.0 - mi - mj + mij;
    const int k = nv + e;

    A(ed.u, ed.u) -= 1.0 / p10 + 1.0 / p00;
    A(ed.v, ed.v) -= 1.0 / p01 + 1.0 / p00;
    A(ed.u, ed.v) = A(ed.v, ed.u) = -1.0 / p00;
    A(ed.u, k) = A(k, ed.u) = 1.0 / p10 + 1.0 / p00;
    A(ed.v, k) = A(k, ed.v) = 1.0 / p01 + 1.0 / p00;
    A(k, k) = -1.0 / p11 - 1.0 / p10 - 1.0 / p01 - 1.0 / p00;
  }
  return A;
}

HomogeneousHessian homogeneous_hessian_values(double mu_v, double mu_e) {
  HomogeneousHessian h;
  h.a_hat = 1.0 / mu_v + 1.0 / (1.0 - mu_v);
  h.b = -1.0 / (1.0 - 2.0 * mu_v + mu_e);
  h.c = 1.0 / (mu_v - mu_e) + 1.0 / (1.0 - 2.0 * mu_v + mu_e);
  h.d = -1.0 / mu_e - 1.0 / (mu_v - mu_e) - h.c;
  return h;
}

HessianMatrix homogeneous_hessian(const Graph& g, double mu_v, double mu_e) {
  const HomogeneousHessian v = homogeneous_hessian_values(mu_v, mu_e);
  const int nv = g.num_nodes();
  HessianMatrix A = HessianMatrix::Zero(nv + g.num_edges(), nv + g.num_edges());
  for (int i = 0; i < nv; ++i) A(i, i) = v.a(g.degree(i));
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    A(ed.u, ed.v) = A(ed.v, ed.u) = v.b;
    A(ed.u, nv + e) = A(nv + e, ed.u) = v.c;
    A(ed.v, nv + e) = A(nv + e, ed.v) = v.c;
    A(nv + e, nv + e) = v.d;
  }
  return A;
}

Lemma2Result lemma2_test(const MinimalMarginals& mu, const Graph& g, double eig_tol) {
  HessianMatrix A = bethe_entropy_hessian(mu, g);
  Eigen::SelfAdjointEigenSolver<HessianMatrix> solver(A, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("lemma2_test: eigen-solver failed");
  Lemma2Result r;
  r.max_eigenvalue = solver.eigenvalues().maxCoeff();
  r.unlearnable = r.max_eigenvalue > eig_tol;
  return r;
}

namespace {

void check_homogeneous_args(int num_nodes, int num_edges, double mu_v, double mu_e) {
  if (num_nodes < 1) throw InputError("lemma 3: N_V must be >= 1");
  if (num_edges < 1) throw InputError("lemma 3: N_E must be >= 1");
  constexpr double tol = 1e-12;
  if (!(mu_v > 0.0 && mu_v < 1.0) || !(mu_e >= -tol) || !(mu_e <= mu_v + tol) ||
      !(mu_e >= 2.0 * mu_v - 1.0 - tol)) {
    throw PolytopeError("lemma 3: (mu_v, mu_e) = (" + std::to_string(mu_v) + ", " + std::to_string(mu_e) +
                        ") violates 2 mu_v - 1 <= mu_e <= mu_v, mu_e >= 0");
  }
}

}  // namespace

Lemma3Result lemma3_test(int num_nodes, int num_edges, double mu_v, double mu_e, double tol) {
  check_homogeneous_args(num_nodes, num_edges, mu_v, mu_e);
  const double r = static_cast<double>(num_nodes) / (2.0 * num_edges);
  Lemma3Result out;
  out.lhs = (mu_e - mu_v * mu_v) * (1.0 - r) - r * mu_v * (1.0 - mu_v);
  out.unlearnable = out.lhs > tol;
  return out;
}

std::optional<double> lemma3_threshold(int num_nodes, int num_edges, double mu_v) {
  check_homogeneous_args(num_nodes, num_edges, mu_v, mu_v);
  const double r = static_cast<double>(num_nodes) / (2.0 * num_edges);
  const double ratio = static_cast<double>(num_nodes) / num_edges;
  if (1.0 - r <= 0.0) return std::nullopt;
  double t = ((1.0 - ratio) * mu_v * mu_v + r * mu_v) / (1.0 - r);
  if (t >= mu_v) return std::nullopt;
  return t;
}

double lemma3_discriminant(int num_nodes, int num_edges, double mu_v, double mu_e) {
  check_homogeneous_args(num_nodes, num_edges, mu_v, mu_e);
  const HomogeneousHessian v = homogeneous_hessian_values(mu_v, mu_e);
  const double q = static_cast<double>(num_nodes) / (4.0 * num_edges);
  return v.c * v.c - 0.5 * v.d * (v.a_hat - v.c + v.b) + q * v.d * v.a_hat;
}

Lemma1Result lemma1_test(const MinimalMarginals& mu, const Graph& g, const BPOptions& bp, int n_restarts,
                         std::uint64_t seed, double margin) {
  TablePotentials theta = canonical_parameters(mu, g);
  Lemma1Result r;
  r.f_at_mu = bethe_free_energy(mu, theta, g);
  RestartResult rr = multi_restart_bp(theta, g, n_restarts, seed, bp);
  r.fixed_points = static_cast<int>(rr.fixed_points.size());
  r.converged_runs = rr.converged_runs;
  for (FixedPoint& fp : rr.fixed_points) {
    if (fp.free_energy > r.f_at_mu + margin) r.witnesses.push_back(std::move(fp));
  }
  r.unlearnable = !r.witnesses.empty();
  return r;
}

double nonbacktracking_spectral_radius(const Graph& g, const std::vector<double>& edge_weights,
                                       int max_iter) {
  if (edge_weights.size() != static_cast<std::size_t>(g.num_edges())) {
    throw InputError("nonbacktracking_spectral_radius: one weight per edge required");
  }
  const std::size_t dim = 2 * static_cast<std::size_t>(g.num_edges());
  if (dim == 0) return 0.0;

  // (i -> j) for directed id d: edge e = d / 2, forward when d is even.
  auto head = [&](std::size_t d) {
    const Edge& ed = g.edge(static_cast<int>(d / 2));
    return d % 2 == 0 ? ed.v : ed.u;
  };
  auto tail = [&](std::size_t d) {
    const Edge& ed = g.edge(static_cast<int>(d / 2));
    return d % 2 == 0 ? ed.u : ed.v;
  };
  // y[(i->j)] = sum_{k in N(j), k != i} w_jk x[(j->k)]
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t d = 0; d < dim; ++d) {
      const int i = tail(d);
      const int j = head(d);
      double s = 0.0;
      auto nbrs = g.neighbors(j);
      auto inc = g.incident_edges(j);
      for (std::size_t t = 0; t < nbrs.size(); ++t) {
        if (nbrs[t] == i) continue;
        const int e = inc[t];
        const std::size_t out = static_cast<std::size_t>(directed_edge(e, g.edge(e).u != j));
        s += edge_weights[static_cast<std::size_t>(e)] * x[out];
      }
      y[d] = s;
    }
  };

  std::vector<double> x(dim, 1.0);
  std::vector<double> y(dim);

  // Nilpotent case (forests, zero weights): M^dim 1 = 0.
  for (std::size_t step = 0; step <= dim; ++step) {
    apply(x, y);
    double m = *std::max_element(y.begin(), y.end());
    if (m == 0.0) return 0.0;
    if (step == dim) break;
    for (std::size_t d = 0; d < dim; ++d) x[d] = y[d] / m;
  }

  // Power iteration on M + I.
  std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(dim));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    apply(x, y);
    double norm = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      y[d] += x[d];
      norm += y[d];
    }
    if (!std::isfinite(norm)) throw NumericalError("nonbacktracking_spectral_radius: overflow");
    for (std::size_t d = 0; d < dim; ++d) x[d] = y[d] / norm;
    if (it > 0 && std::abs(norm - lambda) <= 1e-14 * norm) return norm - 1.0;
    lambda = norm;
  }
  throw ConvergenceError("nonbacktracking_spectral_radius: power iteration did not converge in " +
                         std::to_string(max_iter) + " steps");
}

InnerBoundResult inner_bound_unique(const TablePotentials& theta, const Graph& g) {
  check_finite(theta);
  IsingPotentials s = table_to_ising(theta, g);
  std::vector<double> w(s.coupling.size());
  std::transform(s.coupling.begin(), s.coupling.end(), w.begin(), [](double j) { return std::tanh(std::abs(j)); });
  InnerBoundResult r;
  r.spectral_radius = nonbacktracking_spectral_radius(g, w);
  r.learnable_certificate = r.spectral_radius < 1.0;
  return r;
}

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::UnlearnableLemma3: return "UnlearnableLemma3";
    case Status::UnlearnableLemma2: return "UnlearnableLemma2";
    case Status::UnlearnableLemma1: return "UnlearnableLemma1";
    case Status::LearnableInnerBound: return "LearnableInnerBound";
    case Status::EmpiricalMatch: return "EmpiricalMatch";
    case Status::EmpiricalNoMatch: return "EmpiricalNoMatch";
    case Status::Undetermined: return "Undetermined";
  }
  return "?";
}

Verdict classify(const MinimalMarginals& mu, const Graph& g, const ClassifyOptions& opts) {
  if (auto bad = local_polytope_violation(mu, g, 1e-12)) {
    throw PolytopeError("classify: " + *bad);
  }
  if (min_table_entry(mu, g) < kInteriorEps) {
    throw PolytopeError("classify: marginals must be strictly interior");
  }
  Verdict v;
  std::optional<Status> decided;
  auto decide = [&](Status s) {
    if (!decided) decided = s;
  };
  auto more = [&] { return opts.exhaustive || !decided; };

  if (auto hv = homogeneous_values(mu); hv && g.num_edges() > 0) {
    v.evidence.lemma3 = lemma3_test(g.num_nodes(), g.num_edges(), hv->first, hv->second);
    if (v.evidence.lemma3->unlearnable) decide(Status::UnlearnableLemma3);
  }
  if (more()) {
    v.evidence.lemma2 = lemma2_test(mu, g, opts.eig_tol);
    if (v.evidence.lemma2->unlearnable) decide(Status::UnlearnableLemma2);
  }
  TablePotentials theta_c = canonical_parameters(mu, g);
  if (more()) {
    v.evidence.inner = inner_bound_unique(theta_c, g);
    if (v.evidence.inner->learnable_certificate) decide(Status::LearnableInnerBound);
  }
  if (more()) {
    v.evidence.lemma1 = lemma1_test(mu, g, opts.bp, opts.restarts, opts.seed, opts.lemma1_margin);
    if (v.evidence.lemma1->unlearnable) decide(Status::UnlearnableLemma1);
  }
  if (!decided && opts.empirical) {
    LearnOptions lo = opts.learn;
    lo.bp = opts.bp;
    lo.restarts = opts.restarts;
    lo.seed = opts.seed;
    EmpiricalEvidence ev;
    try {
      LearnTrace trace = learn_subgradient(mu, g, lo);
      ev.learn_status = trace.status;
      ev.iterations = static_cast<int>(trace.records.size());
      ev.learn_residual = trace.final_residual();
      ev.match = moment_matching_check(trace.theta, mu, g, lo.match_tol, opts.bp, opts.restarts, opts.seed);
      decide(ev.match.matched ? Status::EmpiricalMatch : Status::EmpiricalNoMatch);
    } catch (const ConvergenceError&) {
      ev.failed = true;
    }
    v.evidence.empirical = ev;
  }
  v.status = decided.value_or(Status::Undetermined);
  return v;
}

}  // namespace bethe
