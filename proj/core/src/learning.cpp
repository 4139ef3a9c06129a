#include "bethe/learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bethe/error.hpp"
#include "bethe/hull.hpp"

namespace bethe {

namespace {

double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

int grid_divisions(double resolution) {
  if (!(resolution > 0.0 && resolution <= 0.05)) {
    throw InputError("resolution must lie in (0, 0.05], got " + std::to_string(resolution));
  }
  long n = std::lround(1.0 / resolution);
  if (std::abs(static_cast<double>(n) * resolution - 1.0) > 1e-9) {
    throw InputError("resolution must divide 1 evenly, got " + std::to_string(resolution));
  }
  return static_cast<int>(n);
}

struct TopFixedPoint {
  TableMarginals beliefs;
  std::vector<Message> messages;
  double free_energy = 0.0;
};

}  // namespace

const char* to_string(LearnStatus s) noexcept {
  switch (s) {
    case LearnStatus::matched: return "matched";
    case LearnStatus::stalled: return "stalled";
    case LearnStatus::max_iter: return "max_iter";
  }
  return "?";
}

void LearnOptions::validate() const {
  if (!(step0 > 0.0)) throw InputError("learn options: step0 must be > 0");
  if (max_iter < 1) throw InputError("learn options: max_iter must be >= 1");
  if (!(match_tol > 0.0)) throw InputError("learn options: match_tol must be > 0");
  if (restarts < 1) throw InputError("learn options: restarts must be >= 1");
  if (cold_restart_every < 1) throw InputError("learn options: cold_restart_every must be >= 1");
  if (stall_window < 1) throw InputError("learn options: stall_window must be >= 1");
  bp.validate();
}

double bethe_likelihood(const TablePotentials& theta, const MinimalMarginals& mu_bar, const Graph& g,
                        const BPOptions& bp, int n_restarts, std::uint64_t seed) {
  TableMarginals t = to_table(mu_bar, g);
  return dot(t, theta) - bethe_log_partition(theta, g, bp, n_restarts, seed).value;
}

LearnTrace learn_subgradient(const MinimalMarginals& mu_bar, const Graph& g, const LearnOptions& opts) {
  opts.validate();
  const TableMarginals target = to_table(mu_bar, g);
  LearnTrace trace;
  trace.theta = canonical_parameters(mu_bar, g);

  std::vector<Message> warm;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  trace.status = LearnStatus::max_iter;

  for (int t = 0; t < opts.max_iter; ++t) {
    TopFixedPoint top;
    bool have = false;
    if (opts.warm_start && !warm.empty() && t % opts.cold_restart_every != 0) {
      BPResult r = sum_product(trace.theta, g, opts.bp, warm);
      if (r.converged) {
        top.free_energy = bethe_free_energy(r.beliefs, trace.theta, g);
        top.beliefs = std::move(r.beliefs);
        top.messages = std::move(r.messages);
        have = true;
      }
    }
    if (!have) {
      RestartResult rr = multi_restart_bp(trace.theta, g, opts.restarts, opts.seed, opts.bp);
      if (rr.fixed_points.empty()) {
        throw ConvergenceError("learn_subgradient: no BP fixed point found at iterate " + std::to_string(t));
      }
      FixedPoint& fp = rr.fixed_points.front();
      top.beliefs = std::move(fp.beliefs);
      top.messages = std::move(fp.messages);
      top.free_energy = fp.free_energy;
    }

    double residual = max_abs_diff(target, top.beliefs);
    trace.records.push_back({t, dot(target, trace.theta) - top.free_energy, residual});
    if (residual <= opts.match_tol) {
      trace.status = LearnStatus::matched;
      break;
    }
    if (residual < best - 1e-12) {
      best = residual;
      since_best = 0;
    } else if (++since_best >= opts.stall_window) {
      trace.status = LearnStatus::stalled;
      break;
    }
    if (t + 1 == opts.max_iter) break;

    double eta = opts.schedule == StepSchedule::constant ? opts.step0 : opts.step0 / std::sqrt(t + 1.0);
    for (std::size_t i = 0; i < target.node.size(); ++i)
      for (std::size_t x = 0; x < 2; ++x)
        trace.theta.node[i][x] += eta * (target.node[i][x] - top.beliefs.node[i][x]);
    for (std::size_t e = 0; e < target.edge.size(); ++e)
      for (std::size_t k = 0; k < 4; ++k)
        trace.theta.edge[e][k] += eta * (target.edge[e][k] - top.beliefs.edge[e][k]);
    warm = std::move(top.messages);
  }
  return trace;
}

MatchResult moment_matching_check(const TablePotentials& theta, const MinimalMarginals& mu_bar,
                                  const Graph& g, double tol, const BPOptions& bp, int n_restarts,
                                  std::uint64_t seed) {
  const TableMarginals target = to_table(mu_bar, g);
  RestartResult rr = multi_restart_bp(theta, g, n_restarts, seed, bp);
  if (rr.fixed_points.empty()) {
    throw ConvergenceError("moment_matching_check: no BP run converged");
  }
  MatchResult m;
  m.fixed_points = static_cast<int>(rr.fixed_points.size());
  const FixedPoint& top = rr.fixed_points.front();
  m.residual = max_abs_diff(target, top.beliefs);
  m.unique_top = rr.fixed_points.size() == 1 ||
                 rr.fixed_points[1].free_energy < top.free_energy - kFreeEnergyTieTol;
  m.matched = m.residual < tol && m.unique_top;
  return m;
}

double homogeneous_bethe_entropy(int num_nodes, int num_edges, double mu_v, double mu_e) {
  double node = xlogx(mu_v) + xlogx(1.0 - mu_v);
  double edge = xlogx(mu_e) + 2.0 * xlogx(mu_v - mu_e) + xlogx(1.0 - 2.0 * mu_v + mu_e);
  return (2.0 * num_edges - num_nodes) * node - num_edges * edge;
}

double homogeneous_moment(int num_nodes, int num_edges, double h, double J, double mu_v, double mu_e) {
  return num_nodes * h * (2.0 * mu_v - 1.0) + num_edges * J * (1.0 - 4.0 * mu_v + 4.0 * mu_e);
}

double homogeneous_free_energy(int num_nodes, int num_edges, double h, double J, double mu_v, double mu_e) {
  return homogeneous_moment(num_nodes, num_edges, h, J, mu_v, mu_e) +
         homogeneous_bethe_entropy(num_nodes, num_edges, mu_v, mu_e);
}

namespace {

// Grid of the closed homogeneous polytope; entropy precomputed since F is
// linear in (h, J) on top of it.
struct PolytopeGrid {
  int n = 0;
  std::vector<int> row_start;  // index of (k, m_lo(k)) in the flat arrays
  std::vector<double> mu_v;
  std::vector<double> mu_e;
  std::vector<double> entropy;

  static int m_lo(int k, int n) { return std::max(0, 2 * k - n); }

  PolytopeGrid(const Graph& g, double resolution) : n(grid_divisions(resolution)) {
    row_start.resize(static_cast<std::size_t>(n) + 2);
    for (int k = 0; k <= n; ++k) {
      row_start[static_cast<std::size_t>(k)] = static_cast<int>(mu_v.size());
      for (int m = m_lo(k, n); m <= k; ++m) {
        double v = static_cast<double>(k) / n;
        double e = static_cast<double>(m) / n;
        mu_v.push_back(v);
        mu_e.push_back(e);
        entropy.push_back(homogeneous_bethe_entropy(g.num_nodes(), g.num_edges(), v, e));
      }
    }
    row_start[static_cast<std::size_t>(n) + 1] = static_cast<int>(mu_v.size());
  }

  int index(int k, int m) const {
    if (k < 0 || k > n || m < m_lo(k, n) || m > k) return -1;
    return row_start[static_cast<std::size_t>(k)] + (m - m_lo(k, n));
  }

  std::vector<double> free_energy(const Graph& g, double h, double J) const {
    const double nv = g.num_nodes();
    const double ne = g.num_edges();
    const double a = 2.0 * nv * h - 4.0 * ne * J;
    const double b = 4.0 * ne * J;
    const double c = -nv * h + ne * J;
    std::vector<double> f(entropy.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = entropy[i] + a * mu_v[i] + b * mu_e[i] + c;
    return f;
  }

  double max_free_energy(double a, double b, double c) const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entropy.size(); ++i) best = std::max(best, entropy[i] + a * mu_v[i] + b * mu_e[i]);
    return best + c;
  }
};

GridArgmax argmax_on(const PolytopeGrid& grid, const std::vector<double>& f) {
  GridArgmax out;
  for (int k = 0; k <= grid.n; ++k) {
    for (int m = PolytopeGrid::m_lo(k, grid.n); m <= k; ++m) {
      int i = grid.index(k, m);
      double fi = f[static_cast<std::size_t>(i)];
      bool is_max = true;
      for (int dk = -1; dk <= 1 && is_max; ++dk) {
        for (int dm = -1; dm <= 1; ++dm) {
          if (dk == 0 && dm == 0) continue;
          int j = grid.index(k + dk, m + dm);
          if (j >= 0 && f[static_cast<std::size_t>(j)] > fi) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) {
        out.local_maxima.push_back({grid.mu_v[static_cast<std::size_t>(i)], grid.mu_e[static_cast<std::size_t>(i)], fi});
      }
    }
  }
  std::stable_sort(out.local_maxima.begin(), out.local_maxima.end(),
                   [](const GridPoint& a, const GridPoint& b) { return a.free_energy > b.free_energy; });
  out.global = out.local_maxima.front();
  return out;
}

}  // namespace

std::vector<GridPoint> homogeneous_surface(const Graph& g, double h, double J, double resolution) {
  PolytopeGrid grid(g, resolution);
  std::vector<double> f = grid.free_energy(g, h, J);
  std::vector<GridPoint> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = {grid.mu_v[i], grid.mu_e[i], f[i]};
  return out;
}

GridArgmax homogeneous_grid_argmax(const Graph& g, double h, double J, double resolution) {
  PolytopeGrid grid(g, resolution);
  return argmax_on(grid, grid.free_energy(g, h, J));
}

double homogeneous_grid_likelihood(const Graph& g, double h, double J, double mu_v, double mu_e,
                                   double resolution) {
  PolytopeGrid grid(g, resolution);
  const double nv = g.num_nodes();
  const double ne = g.num_edges();
  double fmax = grid.max_free_energy(2.0 * nv * h - 4.0 * ne * J, 4.0 * ne * J, -nv * h + ne * J);
  return homogeneous_moment(g.num_nodes(), g.num_edges(), h, J, mu_v, mu_e) - fmax;
}

Figure1Result figure1_search(double mu_v, double mu_e, const Graph& g, const Figure1Options& opts) {
  MinimalMarginals mu_bar = homogeneous_marginals(g, mu_v, mu_e);
  if (min_table_entry(mu_bar, g) < kInteriorEps) {
    throw PolytopeError("figure1_search: marginals must be strictly interior");
  }
  if (!(opts.theta_resolution > 0.0)) throw InputError("figure1_search: theta resolution must be > 0");
  const long a_lo = std::lround(opts.h_min / opts.theta_resolution);
  const long a_hi = std::lround(opts.h_max / opts.theta_resolution);
  const long b_lo = std::lround(opts.j_min / opts.theta_resolution);
  const long b_hi = std::lround(opts.j_max / opts.theta_resolution);
  if (a_lo > a_hi || b_lo > b_hi) throw InputError("figure1_search: empty parameter grid");

  PolytopeGrid grid(g, opts.mu_resolution);
  const double nv = g.num_nodes();
  const double ne = g.num_edges();

  Figure1Result r;
  r.likelihood = -std::numeric_limits<double>::infinity();
  for (long b = b_lo; b <= b_hi; ++b) {
    double J = static_cast<double>(b) * opts.theta_resolution;
    for (long a = a_lo; a <= a_hi; ++a) {
      double h = static_cast<double>(a) * opts.theta_resolution;
      double fmax = grid.max_free_energy(2.0 * nv * h - 4.0 * ne * J, 4.0 * ne * J, -nv * h + ne * J);
      double ell = homogeneous_moment(g.num_nodes(), g.num_edges(), h, J, mu_v, mu_e) - fmax;
      // Prefer the smaller |h| on exact ties so symmetric inputs land on h = 0.
      if (ell > r.likelihood || (ell == r.likelihood && std::abs(h) < std::abs(r.h))) {
        r.likelihood = ell;
        r.h = h;
        r.J = J;
      }
    }
  }

  GridArgmax am = argmax_on(grid, grid.free_energy(g, r.h, r.J));
  r.f_max = am.global.free_energy;
  std::vector<Point2> pts;
  for (const GridPoint& p : am.local_maxima) {
    if (p.free_energy >= r.f_max - opts.f_tol) {
      r.maximizers.push_back(p);
      pts.push_back({p.mu_v, p.mu_e});
    }
  }
  r.hull_distance = distance_to_hull(pts, {mu_v, mu_e});
  r.hull_contains_mu = r.hull_distance <= opts.hull_tol;
  r.f_at_mu = homogeneous_free_energy(g.num_nodes(), g.num_edges(), r.h, r.J, mu_v, mu_e);
  return r;
}

}  // namespace bethe
