#include "bethe/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bethe/error.hpp"

namespace bethe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) noexcept {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Theta_e(x_from, x_to) for the directed edge from -> to over edge e = (u, v).
double edge_potential(const EdgeTable& t, bool from_is_u, int x_from, int x_to) noexcept {
  return from_is_u ? t[static_cast<std::size_t>(2 * x_from + x_to)]
                   : t[static_cast<std::size_t>(2 * x_to + x_from)];
}

// Message into node `a` along edge e.
int incoming(const Graph& g, int e, int a) {
  return directed_edge(e, g.edge(e).u == a);
}

double safe_log(double x) noexcept { return x > 0.0 ? std::log(x) : kNegInf; }

// Sum over all incoming log-messages per node: acc[a][x].
std::vector<std::array<double, 2>> incoming_log_sums(const TablePotentials& theta, const Graph& g,
                                                     std::span<const Message> msg) {
  std::vector<std::array<double, 2>> acc(static_cast<std::size_t>(g.num_nodes()));
  for (int a = 0; a < g.num_nodes(); ++a) {
    auto& s = acc[static_cast<std::size_t>(a)];
    s = theta.node[static_cast<std::size_t>(a)];
    for (int e : g.incident_edges(a)) {
      const Message& m = msg[static_cast<std::size_t>(incoming(g, e, a))];
      s[0] += safe_log(m[0]);
      s[1] += safe_log(m[1]);
    }
  }
  return acc;
}

// exp(theta) with each table scaled so its largest entry is 1.
struct ExpPotentials {
  std::vector<std::array<double, 2>> node;
  std::vector<EdgeTable> edge;
};

ExpPotentials exp_potentials(const TablePotentials& theta) {
  ExpPotentials p;
  p.node.reserve(theta.node.size());
  for (const NodeTable& t : theta.node) {
    double m = std::max(t[0], t[1]);
    p.node.push_back({std::exp(t[0] - m), std::exp(t[1] - m)});
  }
  p.edge.reserve(theta.edge.size());
  for (const EdgeTable& t : theta.edge) {
    double m = *std::max_element(t.begin(), t.end());
    p.edge.push_back({std::exp(t[0] - m), std::exp(t[1] - m), std::exp(t[2] - m), std::exp(t[3] - m)});
  }
  return p;
}

inline std::array<double, 2> scaled_product(const std::array<double, 2>& a, const Message& b) noexcept {
  std::array<double, 2> r{a[0] * b[0], a[1] * b[1]};
  double m = std::max(r[0], r[1]);
  if (m > 0.0) {
    r[0] /= m;
    r[1] /= m;
  }
  return r;
}

// One undamped synchronous sweep: out[d] = update of directed message d.
// Cavity products come from prefix/suffix products over each node's incoming
// messages, rescaled at every step.
void sweep(const ExpPotentials& psi, const Graph& g, std::span<const Message> msg, std::vector<Message>& out,
           std::vector<std::array<double, 2>>& prefix) {
  out.resize(msg.size());
  for (int a = 0; a < g.num_nodes(); ++a) {
    auto inc = g.incident_edges(a);
    const std::size_t d = inc.size();
    prefix.resize(d + 1);
    prefix[0] = psi.node[static_cast<std::size_t>(a)];
    for (std::size_t k = 0; k < d; ++k) {
      prefix[k + 1] = scaled_product(prefix[k], msg[static_cast<std::size_t>(incoming(g, inc[k], a))]);
    }
    std::array<double, 2> suffix{1.0, 1.0};
    for (std::size_t k = d; k-- > 0;) {
      const int e = inc[k];
      const bool from_is_u = g.edge(e).u == a;
      const EdgeTable& t = psi.edge[static_cast<std::size_t>(e)];
      std::array<double, 2> cav{prefix[k][0] * suffix[0], prefix[k][1] * suffix[1]};
      double m0 = cav[0] * edge_potential(t, from_is_u, 0, 0) + cav[1] * edge_potential(t, from_is_u, 1, 0);
      double m1 = cav[0] * edge_potential(t, from_is_u, 0, 1) + cav[1] * edge_potential(t, from_is_u, 1, 1);
      double z = m0 + m1;
      if (!(z > 0.0) || !std::isfinite(z)) {
        throw NumericalError("sum_product: degenerate message on edge " + std::to_string(e));
      }
      out[static_cast<std::size_t>(directed_edge(e, !from_is_u))] = {m0 / z, m1 / z};
      suffix = scaled_product(suffix, msg[static_cast<std::size_t>(incoming(g, e, a))]);
    }
  }
}

std::vector<Message> initial_messages(const Graph& g, const BPOptions& opts, int run) {
  std::vector<Message> msg(2 * static_cast<std::size_t>(g.num_edges()), Message{0.5, 0.5});
  if (opts.init == MessageInit::random) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&] {
      double u = 0.0;
      while (u == 0.0) u = unif(rng);
      return u;
    };
    for (Message& m : msg) {
      double a = draw();
      double b = draw();
      m = {a / (a + b), b / (a + b)};
    }
  }
  return msg;
}

BPResult run_bp(const TablePotentials& theta, const Graph& g, const BPOptions& opts,
                std::vector<Message> msg) {
  BPResult r;
  const ExpPotentials psi = exp_potentials(theta);
  std::vector<Message> upd;
  std::vector<std::array<double, 2>> scratch;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < opts.max_iter) {
    sweep(psi, g, msg, upd, scratch);
    ++it;
    residual = 0.0;
    for (std::size_t d = 0; d < msg.size(); ++d) {
      residual = std::max({residual, std::abs(upd[d][0] - msg[d][0]), std::abs(upd[d][1] - msg[d][1])});
    }
    if (residual <= opts.tol) {
      r.converged = true;
      break;
    }
    for (std::size_t d = 0; d < msg.size(); ++d) {
      for (std::size_t x = 0; x < 2; ++x) {
        msg[d][x] = (1.0 - opts.damping) * upd[d][x] + opts.damping * msg[d][x];
      }
    }
  }
  if (g.num_edges() == 0) {
    r.converged = true;
    residual = 0.0;
  }
  r.iterations = it;
  r.residual = residual;
  r.beliefs = beliefs_from_messages(theta, g, msg);
  r.messages = std::move(msg);
  return r;
}

void check_table(const TableMarginals& mu, const Graph& g) {
  constexpr double tol = 1e-6;
  check_sizes(mu, g);
  for (std::size_t i = 0; i < mu.node.size(); ++i) {
    const auto& n = mu.node[i];
    if (n[0] < -tol || n[1] < -tol || std::abs(n[0] + n[1] - 1.0) > tol) {
      throw PolytopeError("bethe_entropy: node " + std::to_string(i) + " is not a distribution");
    }
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& t = mu.edge[static_cast<std::size_t>(e)];
    const auto& ni = mu.node[static_cast<std::size_t>(g.edge(e).u)];
    const auto& nj = mu.node[static_cast<std::size_t>(g.edge(e).v)];
    if (*std::min_element(t.begin(), t.end()) < -tol ||
        std::abs(t[0] + t[1] + t[2] + t[3] - 1.0) > tol || std::abs(t[2] + t[3] - ni[1]) > tol ||
        std::abs(t[1] + t[3] - nj[1]) > tol) {
      throw PolytopeError("bethe_entropy: edge " + std::to_string(e) + " violates local consistency");
    }
  }
}

double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

void BPOptions::validate() const {
  if (max_iter < 1) throw InputError("bp options: max_iter must be >= 1");
  if (!(tol > 0.0)) throw InputError("bp options: tol must be > 0");
  if (!(damping >= 0.0 && damping < 1.0)) throw InputError("bp options: damping must be in [0, 1)");
}

TableMarginals beliefs_from_messages(const TablePotentials& theta, const Graph& g,
                                     std::span<const Message> messages) {
  auto acc = incoming_log_sums(theta, g, messages);
  TableMarginals b;
  b.node.resize(static_cast<std::size_t>(g.num_nodes()));
  for (std::size_t a = 0; a < b.node.size(); ++a) {
    double z = log_add(acc[a][0], acc[a][1]);
    b.node[a] = {std::exp(acc[a][0] - z), std::exp(acc[a][1] - z)};
  }
  b.edge.resize(static_cast<std::size_t>(g.num_edges()));
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    double pu[2];
    double pv[2];
    const Message& vu = messages[static_cast<std::size_t>(incoming(g, e, ed.u))];
    const Message& uv = messages[static_cast<std::size_t>(incoming(g, e, ed.v))];
    for (int x = 0; x < 2; ++x) {
      auto sx = static_cast<std::size_t>(x);
      pu[x] = acc[static_cast<std::size_t>(ed.u)][sx] - safe_log(vu[sx]);
      pv[x] = acc[static_cast<std::size_t>(ed.v)][sx] - safe_log(uv[sx]);
    }
    const EdgeTable& t = theta.edge[static_cast<std::size_t>(e)];
    double l[4];
    double z = kNegInf;
    for (int xu = 0; xu < 2; ++xu) {
      for (int xv = 0; xv < 2; ++xv) {
        int k = 2 * xu + xv;
        l[k] = pu[xu] + pv[xv] + t[static_cast<std::size_t>(k)];
        z = log_add(z, l[k]);
      }
    }
    for (int k = 0; k < 4; ++k) b.edge[static_cast<std::size_t>(e)][static_cast<std::size_t>(k)] = std::exp(l[k] - z);
  }
  return b;
}

double fixed_point_residual(const TablePotentials& theta, const Graph& g,
                            std::span<const Message> messages) {
  std::vector<Message> upd;
  std::vector<std::array<double, 2>> scratch;
  sweep(exp_potentials(theta), g, messages, upd, scratch);
  double r = 0.0;
  for (std::size_t d = 0; d < messages.size(); ++d) {
    r = std::max({r, std::abs(upd[d][0] - messages[d][0]), std::abs(upd[d][1] - messages[d][1])});
  }
  return r;
}

BPResult sum_product(const TablePotentials& theta, const Graph& g, const BPOptions& opts,
                     std::span<const Message> initial) {
  opts.validate();
  check_sizes(theta, g);
  check_finite(theta);
  std::vector<Message> msg;
  if (!initial.empty()) {
    if (initial.size() != 2 * static_cast<std::size_t>(g.num_edges())) {
      throw InputError("sum_product: initial message count does not match 2 * N_E");
    }
    msg.assign(initial.begin(), initial.end());
  } else {
    msg = initial_messages(g, opts, 0);
  }
  return run_bp(theta, g, opts, std::move(msg));
}

RestartResult multi_restart_bp(const TablePotentials& theta, const Graph& g, int n_restarts,
                               std::uint64_t seed, const BPOptions& opts) {
  if (n_restarts < 1) throw InputError("multi_restart_bp: n_restarts must be >= 1");
  opts.validate();
  check_sizes(theta, g);
  check_finite(theta);
  RestartResult out;
  out.residuals.reserve(static_cast<std::size_t>(n_restarts));
  for (int run = 0; run < n_restarts; ++run) {
    BPOptions o = opts;
    o.init = run == 0 ? MessageInit::uniform : MessageInit::random;
    o.seed = seed;
    BPResult r = run_bp(theta, g, o, initial_messages(g, o, run));
    out.residuals.push_back(r.residual);
    if (!r.converged) continue;
    ++out.converged_runs;
    bool duplicate = std::any_of(out.fixed_points.begin(), out.fixed_points.end(), [&](const FixedPoint& fp) {
      return max_abs_diff(fp.beliefs, r.beliefs) <= kDedupeTol;
    });
    if (duplicate) continue;
    FixedPoint fp;
    fp.free_energy = bethe_free_energy(r.beliefs, theta, g);
    fp.beliefs = std::move(r.beliefs);
    fp.messages = std::move(r.messages);
    fp.run = run;
    out.fixed_points.push_back(std::move(fp));
  }
  std::stable_sort(out.fixed_points.begin(), out.fixed_points.end(),
                   [](const FixedPoint& a, const FixedPoint& b) { return a.free_energy > b.free_energy; });
  return out;
}

double bethe_entropy(const TableMarginals& mu, const Graph& g) {
  check_table(mu, g);
  double h = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const auto& n = mu.node[static_cast<std::size_t>(i)];
    h += (g.degree(i) - 1) * (xlogx(n[0]) + xlogx(n[1]));
  }
  for (const auto& t : mu.edge) h -= xlogx(t[0]) + xlogx(t[1]) + xlogx(t[2]) + xlogx(t[3]);
  return h;
}

double bethe_entropy(const MinimalMarginals& mu, const Graph& g) {
  return bethe_entropy(to_table(mu, g), g);
}

double bethe_free_energy(const TableMarginals& mu, const TablePotentials& theta, const Graph& g) {
  check_sizes(theta, g);
  return dot(mu, theta) + bethe_entropy(mu, g);
}

double bethe_free_energy(const MinimalMarginals& mu, const TablePotentials& theta, const Graph& g) {
  return bethe_free_energy(to_table(mu, g), theta, g);
}

BetheLogPartition bethe_log_partition(const TablePotentials& theta, const Graph& g,
                                      const BPOptions& opts, int n_restarts, std::uint64_t seed) {
  RestartResult r = multi_restart_bp(theta, g, n_restarts, seed, opts);
  if (r.fixed_points.empty()) {
    throw ConvergenceError("bethe_log_partition: no BP run converged in " + std::to_string(opts.max_iter) +
                           " iterations; raise damping or max_iter");
  }
  BetheLogPartition out;
  out.value = r.fixed_points.front().free_energy;
  out.fixed_points = static_cast<int>(r.fixed_points.size());
  return out;
}

ExactResult exact_inference(const TablePotentials& theta, const Graph& g) {
  const int n = g.num_nodes();
  if (n > kMaxExactNodes) {
    throw InputError("exact_inference: " + std::to_string(n) + " nodes exceeds the enumeration limit of " +
                     std::to_string(kMaxExactNodes));
  }
  check_sizes(theta, g);
  check_finite(theta);
  const std::uint64_t count = std::uint64_t{1} << n;
  auto energy = [&](std::uint64_t x) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += theta.node[static_cast<std::size_t>(i)][(x >> i) & 1U];
    for (int e = 0; e < g.num_edges(); ++e) {
      const Edge& ed = g.edge(e);
      auto k = 2 * ((x >> ed.u) & 1U) + ((x >> ed.v) & 1U);
      s += theta.edge[static_cast<std::size_t>(e)][k];
    }
    return s;
  };
  double emax = kNegInf;
  for (std::uint64_t x = 0; x < count; ++x) emax = std::max(emax, energy(x));

  ExactResult r;
  r.marginals.node.assign(static_cast<std::size_t>(n), NodeTable{0.0, 0.0});
  r.marginals.edge.assign(static_cast<std::size_t>(g.num_edges()), EdgeTable{0.0, 0.0, 0.0, 0.0});
  double z = 0.0;
  for (std::uint64_t x = 0; x < count; ++x) {
    double w = std::exp(energy(x) - emax);
    z += w;
    for (int i = 0; i < n; ++i) r.marginals.node[static_cast<std::size_t>(i)][(x >> i) & 1U] += w;
    for (int e = 0; e < g.num_edges(); ++e) {
      const Edge& ed = g.edge(e);
      r.marginals.edge[static_cast<std::size_t>(e)][2 * ((x >> ed.u) & 1U) + ((x >> ed.v) & 1U)] += w;
    }
  }
  for (auto& t : r.marginals.node)
    for (double& v : t) v /= z;
  for (auto& t : r.marginals.edge)
    for (double& v : t) v /= z;
  r.log_partition = emax + std::log(z);
  return r;
}

}  // namespace bethe
