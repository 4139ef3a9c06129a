#include "bethe/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bethe/error.hpp"

namespace bethe {

namespace {

constexpr double kConsistencyTol = 1e-9;

std::string fmt_double(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

const char* kEntryName[4] = {"(0,0)", "(0,1)", "(1,0)", "(1,1)"};

}  // namespace

TablePotentials TablePotentials::zeros(const Graph& g) {
  TablePotentials t;
  t.node.assign(static_cast<std::size_t>(g.num_nodes()), NodeTable{0.0, 0.0});
  t.edge.assign(static_cast<std::size_t>(g.num_edges()), EdgeTable{0.0, 0.0, 0.0, 0.0});
  return t;
}

void check_sizes(const TablePotentials& theta, const Graph& g) {
  if (theta.node.size() != static_cast<std::size_t>(g.num_nodes()) ||
      theta.edge.size() != static_cast<std::size_t>(g.num_edges())) {
    throw InputError("potentials: expected " + std::to_string(g.num_nodes()) + " node and " +
                     std::to_string(g.num_edges()) + " edge tables, got " +
                     std::to_string(theta.node.size()) + " and " + std::to_string(theta.edge.size()));
  }
}

void check_sizes(const MinimalMarginals& mu, const Graph& g) {
  if (mu.node.size() != static_cast<std::size_t>(g.num_nodes()) ||
      mu.edge.size() != static_cast<std::size_t>(g.num_edges())) {
    throw InputError("marginals: expected " + std::to_string(g.num_nodes()) + " node and " +
                     std::to_string(g.num_edges()) + " edge values, got " +
                     std::to_string(mu.node.size()) + " and " + std::to_string(mu.edge.size()));
  }
}

void check_sizes(const TableMarginals& mu, const Graph& g) {
  if (mu.node.size() != static_cast<std::size_t>(g.num_nodes()) ||
      mu.edge.size() != static_cast<std::size_t>(g.num_edges())) {
    throw InputError("marginals: expected " + std::to_string(g.num_nodes()) + " node and " +
                     std::to_string(g.num_edges()) + " edge tables, got " +
                     std::to_string(mu.node.size()) + " and " + std::to_string(mu.edge.size()));
  }
}

void check_finite(const TablePotentials& theta) {
  for (std::size_t i = 0; i < theta.node.size(); ++i)
    for (double v : theta.node[i])
      if (!std::isfinite(v)) throw InputError("potentials: node " + std::to_string(i) + " has a non-finite entry");
  for (std::size_t e = 0; e < theta.edge.size(); ++e)
    for (double v : theta.edge[e])
      if (!std::isfinite(v)) throw InputError("potentials: edge " + std::to_string(e) + " has a non-finite entry");
}

MinimalMarginals homogeneous_marginals(const Graph& g, double mu_v, double mu_e) {
  constexpr double tol = 1e-12;
  if (!(mu_v > 0.0 && mu_v < 1.0)) {
    throw PolytopeError("homogeneous marginals: need 0 < mu_v < 1, got mu_v = " + fmt_double(mu_v));
  }
  if (!(mu_e >= -tol)) {
    throw PolytopeError("homogeneous marginals: need mu_e >= 0, got mu_e = " + fmt_double(mu_e));
  }
  if (!(mu_e <= mu_v + tol)) {
    throw PolytopeError("homogeneous marginals: need mu_e <= mu_v, got mu_e = " + fmt_double(mu_e) +
                        " > mu_v = " + fmt_double(mu_v));
  }
  if (!(mu_e >= 2.0 * mu_v - 1.0 - tol)) {
    throw PolytopeError("homogeneous marginals: need mu_e >= 2 mu_v - 1, got mu_e = " +
                        fmt_double(mu_e) + " < " + fmt_double(2.0 * mu_v - 1.0));
  }
  MinimalMarginals mu;
  mu.node.assign(static_cast<std::size_t>(g.num_nodes()), mu_v);
  mu.edge.assign(static_cast<std::size_t>(g.num_edges()), mu_e);
  return mu;
}

std::optional<std::string> local_polytope_violation(const MinimalMarginals& mu, const Graph& g,
                                                    double tol) {
  check_sizes(mu, g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    double m = mu.node[static_cast<std::size_t>(i)];
    if (!(m >= -tol)) return "node " + std::to_string(i) + ": mu_i = " + fmt_double(m) + " < 0";
    if (!(m <= 1.0 + tol)) return "node " + std::to_string(i) + ": mu_i = " + fmt_double(m) + " > 1";
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    double mi = mu.node[static_cast<std::size_t>(ed.u)];
    double mj = mu.node[static_cast<std::size_t>(ed.v)];
    double mij = mu.edge[static_cast<std::size_t>(e)];
    std::string where = "edge " + std::to_string(e) + " (" + std::to_string(ed.u) + "," +
                        std::to_string(ed.v) + "): ";
    if (!(mij >= -tol)) return where + "mu_ij = " + fmt_double(mij) + " < 0";
    if (!(mi - mij >= -tol)) return where + "mu_i - mu_ij = " + fmt_double(mi - mij) + " < 0";
    if (!(mj - mij >= -tol)) return where + "mu_j - mu_ij = " + fmt_double(mj - mij) + " < 0";
    double p00 = 1.0 - mi - mj + mij;
    if (!(p00 >= -tol)) return where + "1 - mu_i - mu_j + mu_ij = " + fmt_double(p00) + " < 0";
  }
  return std::nullopt;
}

bool in_local_polytope(const MinimalMarginals& mu, const Graph& g, double tol) {
  return !local_polytope_violation(mu, g, tol).has_value();
}

EdgeTable edge_table(double mu_i, double mu_j, double mu_ij) noexcept {
  return {1.0 - mu_i - mu_j + mu_ij, mu_j - mu_ij, mu_i - mu_ij, mu_ij};
}

TableMarginals to_table(const MinimalMarginals& mu, const Graph& g) {
  if (auto bad = local_polytope_violation(mu, g, 1e-12)) {
    throw PolytopeError("marginals outside the local polytope: " + *bad);
  }
  TableMarginals t;
  t.node.reserve(mu.node.size());
  for (double m : mu.node) t.node.push_back({1.0 - m, m});
  t.edge.reserve(mu.edge.size());
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    t.edge.push_back(edge_table(mu.node[static_cast<std::size_t>(ed.u)],
                                mu.node[static_cast<std::size_t>(ed.v)],
                                mu.edge[static_cast<std::size_t>(e)]));
  }
  return t;
}

MinimalMarginals to_minimal(const TableMarginals& mu, const Graph& g) {
  check_sizes(mu, g);
  for (int i = 0; i < g.num_nodes(); ++i) {
    const NodeTable& n = mu.node[static_cast<std::size_t>(i)];
    if (n[0] < -kConsistencyTol || n[1] < -kConsistencyTol ||
        std::abs(n[0] + n[1] - 1.0) > kConsistencyTol) {
      throw PolytopeError("table marginals: node " + std::to_string(i) + " is not a distribution");
    }
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const EdgeTable& t = mu.edge[static_cast<std::size_t>(e)];
    const Edge& ed = g.edge(e);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (t[static_cast<std::size_t>(k)] < -kConsistencyTol) {
        throw PolytopeError("table marginals: edge " + std::to_string(e) + " entry " + kEntryName[k] +
                            " is negative");
      }
      sum += t[static_cast<std::size_t>(k)];
    }
    if (std::abs(sum - 1.0) > kConsistencyTol) {
      throw PolytopeError("table marginals: edge " + std::to_string(e) + " does not sum to 1");
    }
    const NodeTable& ni = mu.node[static_cast<std::size_t>(ed.u)];
    const NodeTable& nj = mu.node[static_cast<std::size_t>(ed.v)];
    if (std::abs(t[2] + t[3] - ni[1]) > kConsistencyTol ||
        std::abs(t[1] + t[3] - nj[1]) > kConsistencyTol) {
      throw PolytopeError("table marginals: edge " + std::to_string(e) +
                          " is inconsistent with its node marginals");
    }
  }
  MinimalMarginals m;
  m.node.reserve(mu.node.size());
  for (const NodeTable& n : mu.node) m.node.push_back(n[1]);
  m.edge.reserve(mu.edge.size());
  for (const EdgeTable& t : mu.edge) m.edge.push_back(t[3]);
  return m;
}

double min_table_entry(const MinimalMarginals& mu, const Graph& g) {
  check_sizes(mu, g);
  double lo = 1.0;
  for (double m : mu.node) lo = std::min({lo, m, 1.0 - m});
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    EdgeTable t = edge_table(mu.node[static_cast<std::size_t>(ed.u)],
                             mu.node[static_cast<std::size_t>(ed.v)], mu.edge[static_cast<std::size_t>(e)]);
    lo = std::min(lo, *std::min_element(t.begin(), t.end()));
  }
  return lo;
}

TablePotentials canonical_parameters(const MinimalMarginals& mu, const Graph& g) {
  TableMarginals t = to_table(mu, g);
  TablePotentials theta;
  theta.node.reserve(t.node.size());
  for (std::size_t i = 0; i < t.node.size(); ++i) {
    for (int x = 0; x < 2; ++x) {
      if (t.node[i][static_cast<std::size_t>(x)] < kInteriorEps) {
        throw PolytopeError("canonical parameters: node " + std::to_string(i) + " has mu_i(" +
                            std::to_string(x) + ") = " + fmt_double(t.node[i][static_cast<std::size_t>(x)]) +
                            " (boundary marginal, log of zero)");
      }
    }
    theta.node.push_back({std::log(t.node[i][0]), std::log(t.node[i][1])});
  }
  theta.edge.reserve(t.edge.size());
  for (int e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    const EdgeTable& p = t.edge[static_cast<std::size_t>(e)];
    const NodeTable& pi = t.node[static_cast<std::size_t>(ed.u)];
    const NodeTable& pj = t.node[static_cast<std::size_t>(ed.v)];
    EdgeTable th{};
    for (int xi = 0; xi < 2; ++xi) {
      for (int xj = 0; xj < 2; ++xj) {
        auto k = static_cast<std::size_t>(2 * xi + xj);
        if (p[k] < kInteriorEps) {
          throw PolytopeError("canonical parameters: edge " + std::to_string(e) + " (" +
                              std::to_string(ed.u) + "," + std::to_string(ed.v) + ") entry " +
                              kEntryName[k] + " = " + fmt_double(p[k]) +
                              " (boundary marginal, log of zero)");
        }
        th[k] = std::log(p[k] / (pi[static_cast<std::size_t>(xi)] * pj[static_cast<std::size_t>(xj)]));
      }
    }
    theta.edge.push_back(th);
  }
  return theta;
}

IsingPotentials table_to_ising(const TablePotentials& theta, const Graph& g) {
  check_sizes(theta, g);
  IsingPotentials s;
  s.field.resize(theta.node.size());
  s.coupling.resize(theta.edge.size());
  for (std::size_t i = 0; i < theta.node.size(); ++i) {
    s.field[i] = 0.5 * (theta.node[i][1] - theta.node[i][0]);
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const EdgeTable& t = theta.edge[static_cast<std::size_t>(e)];
    const Edge& ed = g.edge(e);
    s.coupling[static_cast<std::size_t>(e)] = 0.25 * (t[0] + t[3] - t[1] - t[2]);
    s.field[static_cast<std::size_t>(ed.u)] += 0.25 * (t[3] + t[2] - t[1] - t[0]);
    s.field[static_cast<std::size_t>(ed.v)] += 0.25 * (t[3] + t[1] - t[2] - t[0]);
  }
  return s;
}

TablePotentials ising_to_table(const IsingPotentials& ising, const Graph& g) {
  if (ising.field.size() != static_cast<std::size_t>(g.num_nodes()) ||
      ising.coupling.size() != static_cast<std::size_t>(g.num_edges())) {
    throw InputError("ising potentials: size mismatch with graph");
  }
  TablePotentials t;
  t.node.reserve(ising.field.size());
  for (double h : ising.field) t.node.push_back({-h, h});
  t.edge.reserve(ising.coupling.size());
  for (double j : ising.coupling) t.edge.push_back({j, -j, -j, j});
  return t;
}

double dot(const TableMarginals& mu, const TablePotentials& theta) {
  if (mu.node.size() != theta.node.size() || mu.edge.size() != theta.edge.size()) {
    throw InputError("dot: marginals and potentials have different sizes");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < mu.node.size(); ++i)
    for (std::size_t x = 0; x < 2; ++x) s += mu.node[i][x] * theta.node[i][x];
  for (std::size_t e = 0; e < mu.edge.size(); ++e)
    for (std::size_t k = 0; k < 4; ++k) s += mu.edge[e][k] * theta.edge[e][k];
  return s;
}

double max_abs_diff(const TableMarginals& a, const TableMarginals& b) {
  if (a.node.size() != b.node.size() || a.edge.size() != b.edge.size()) {
    throw InputError("max_abs_diff: marginals have different sizes");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < a.node.size(); ++i)
    for (std::size_t x = 0; x < 2; ++x) d = std::max(d, std::abs(a.node[i][x] - b.node[i][x]));
  for (std::size_t e = 0; e < a.edge.size(); ++e)
    for (std::size_t k = 0; k < 4; ++k) d = std::max(d, std::abs(a.edge[e][k] - b.edge[e][k]));
  return d;
}

std::optional<std::pair<double, double>> homogeneous_values(const MinimalMarginals& mu, double tol) {
  if (mu.node.empty() || mu.edge.empty()) return std::nullopt;
  double v = mu.node.front();
  double e = mu.edge.front();
  for (double x : mu.node)
    if (std::abs(x - v) > tol) return std::nullopt;
  for (double x : mu.edge)
    if (std::abs(x - e) > tol) return std::nullopt;
  return std::make_pair(v, e);
}

}  // namespace bethe
