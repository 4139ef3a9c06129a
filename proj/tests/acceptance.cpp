// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bethe/hull.hpp"
#include "bethe/inference.hpp"
#include "bethe/learnability.hpp"
#include "bethe/learning.hpp"
#include "bethe_cli/cli.hpp"
#include "oracle.hpp"

using namespace bethe;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  // Everything a rerun must reproduce exactly.
  std::string fingerprint;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bethe");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::vector<cli::ScanRow> read_rows(const std::string& path) {
  std::ifstream f(path);
  return cli::read_scan_csv(f);
}

Outcome tree_exactness() {
  Outcome o;
  std::mt19937_64 rng(1001);
  double worst_z = 0.0, worst_mu = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Graph g = oracle::random_tree(2 + rep % 9, rng);
    TablePotentials th = oracle::random_theta(g, -2, 2, rng);
    auto ex = oracle::enumerate(th, g);
    BetheLogPartition lz = bethe_log_partition(th, g, {}, 20, 0);
    BPResult r = sum_product(th, g, {});
    require(o, r.converged, fmt::format("BP did not converge on tree {}", rep));
    double dz = std::abs(lz.value - ex.log_z);
    double dm = 0.0;
    for (int i = 0; i < g.num_nodes(); ++i) dm = std::max(dm, std::abs(r.beliefs.node[i][1] - ex.node1[i]));
    for (int e = 0; e < g.num_edges(); ++e) {
      for (int k = 0; k < 4; ++k) dm = std::max(dm, std::abs(r.beliefs.edge[e][k] - ex.edge[e][k]));
    }
    worst_z = std::max(worst_z, dz);
    worst_mu = std::max(worst_mu, dm);
    o.fingerprint += fmt::format("{};", lz.value);
  }
  require(o, worst_z < 1e-6, fmt::format("max |log Z_B - log Z| = {:.3e}", worst_z));
  require(o, worst_mu < 1e-8, fmt::format("max marginal error = {:.3e}", worst_mu));
  if (o.pass) o.detail = fmt::format("max |dlogZ| {:.2e}, max |dmu| {:.2e}", worst_z, worst_mu);
  return o;
}

Outcome canonical_matching() {
  Outcome o;
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    Graph g = oracle::random_tree(2 + rep % 9, rng);
    MinimalMarginals mu = oracle::random_marginals(g, 0.01, rng);
    BPResult r = sum_product(canonical_parameters(mu, g), g, {});
    require(o, r.converged, fmt::format("BP did not converge on case {}", rep));
    double d = max_abs_diff(r.beliefs, to_table(mu, g));
    worst = std::max(worst, d);
    o.fingerprint += fmt::format("{};", d);
  }
  require(o, worst < 1e-8, fmt::format("max |mu_BP - mu| = {:.3e}", worst));
  if (o.pass) o.detail = fmt::format("max |mu_BP - mu| {:.2e}", worst);
  return o;
}

Outcome hessian_validation() {
  Outcome o;
  std::mt19937_64 rng(1003);
  double worst_fd = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Graph g = rep % 4 == 0 ? torus(3, 3) : oracle::random_loopy(5 + rep % 4, rep % 5, rng);
    MinimalMarginals mu = oracle::random_marginals(g, 0.05, rng);
    double err = (bethe_entropy_hessian(mu, g) - oracle::fd_hessian(g, mu)).cwiseAbs().maxCoeff();
    worst_fd = std::max(worst_fd, err);
  }
  double worst_h = 0.0;
  for (Graph g : {torus(3, 3), complete(6), cycle(6), chain(5), torus(3, 4)}) {
    const int n = 20;
    for (int k = 1; k < n; ++k) {
      for (int m = std::max(0, 2 * k - n) + 1; m < k; ++m) {
        double mv = double(k) / n, me = double(m) / n;
        HessianMatrix a = bethe_entropy_hessian(homogeneous_marginals(g, mv, me), g);
        HessianMatrix b = homogeneous_hessian(g, mv, me);
        worst_h = std::max(worst_h, (a - b).cwiseAbs().maxCoeff());
      }
    }
  }
  require(o, worst_fd < 1e-4, fmt::format("finite-difference error {:.3e}", worst_fd));
  require(o, worst_h <= 1e-12, fmt::format("homogeneous construction error {:.3e}", worst_h));
  o.fingerprint = fmt::format("{};{}", worst_fd, worst_h);
  if (o.pass) o.detail = fmt::format("FD {:.2e}, homogeneous {:.2e}", worst_fd, worst_h);
  return o;
}

Outcome lemma_hierarchy() {
  Outcome o;
  Graph g = torus(3, 3);
  const int n = 100;
  int positive = 0, boundary = 0, points = 0;
  for (int k = 1; k < n; ++k) {
    for (int m = std::max(0, 2 * k - n) + 1; m < k; ++m) {
      ++points;
      double mv = double(k) / n, me = double(m) / n;
      long long exact = oracle::lemma3_lhs_scaled(9, 18, n, k, m);
      Lemma3Result l3 = lemma3_test(9, 18, mv, me);
      double disc = lemma3_discriminant(9, 18, mv, me);
      if (exact == 0) {
        ++boundary;
        require(o, !l3.unlearnable, fmt::format("lemma 3 fired on the boundary at ({}, {})", mv, me));
        continue;
      }
      require(o, l3.unlearnable == (exact > 0), fmt::format("lemma 3 sign wrong at ({}, {})", mv, me));
      require(o, (l3.lhs > 0) == (disc > 0), fmt::format("discriminant sign disagrees at ({}, {})", mv, me));
      if (l3.unlearnable) {
        ++positive;
        double lam = lemma2_test(homogeneous_marginals(g, mv, me), g).max_eigenvalue;
        require(o, lam > kEigTol, fmt::format("lambda_max = {:.3e} at ({}, {})", lam, mv, me));
      }
      o.fingerprint += l3.unlearnable ? '1' : '0';
    }
  }
  require(o, positive > 0, "no lemma 3 points");
  if (o.pass) {
    o.detail = fmt::format("{} grid points, {} lemma-3 points, {} exact boundary points", points, positive, boundary);
  }
  return o;
}

Outcome tree_cycle_emptiness() {
  Outcome o;
  int rows = 0;
  for (const char* spec : {"chain:5", "cycle:6"}) {
    std::string path = fmt::format("acc_scan_{}.csv", spec[1] == 'h' ? "chain5" : "cycle6");
    int code = run_cli({"scan", "--graph", spec, "--resolution", "0.01", "--seed", "7", "--out", path});
    require(o, code == 0, fmt::format("scan {} exited {}", spec, code));
    for (const auto& r : read_rows(path)) {
      ++rows;
      require(o, r.lemma3 != cli::Flag::yes, fmt::format("{}: lemma3 hit at ({}, {})", spec, r.mu_v, r.mu_e));
      require(o, r.lemma2 != cli::Flag::yes, fmt::format("{}: lemma2 hit at ({}, {})", spec, r.mu_v, r.mu_e));
      require(o, r.lemma2 == cli::Flag::no, fmt::format("{}: lemma2 not evaluated", spec));
    }
    o.fingerprint += slurp(path);
  }
  if (o.pass) o.detail = fmt::format("{} rows, 0 lemma-3 hits, 0 lemma-2 hits", rows);
  return o;
}

Outcome torus_threshold() {
  Outcome o;
  Graph g = torus(3, 3);
  auto t = lemma3_threshold(9, 18, 0.5);
  require(o, t && std::abs(*t - 1.0 / 3.0) <= 1e-9, "lemma3_threshold(torus 3x3, 0.5) != 1/3");

  auto radius = [&](double me) {
    return inner_bound_unique(canonical_parameters(homogeneous_marginals(g, 0.5, me), g), g).spectral_radius;
  };
  // Upper spectral boundary: radius crosses 1 between 0.25 and 0.49.
  double lo = 0.25, hi = 0.49;
  for (int it = 0; it < 60; ++it) {
    double mid = (lo + hi) / 2;
    (radius(mid) < 1.0 ? lo : hi) = mid;
  }
  require(o, std::abs(lo - 1.0 / 3.0) <= 1e-3, fmt::format("spectral boundary at {:.6f}", lo));

  const std::string path = "acc_scan_torus.csv";
  int code = run_cli({"scan", "--graph", "torus:3x3", "--resolution", "0.01", "--seed", "7", "--out", path});
  require(o, code == 0, fmt::format("scan exited {}", code));
  int inner = 0, l3 = 0, inner_low = 0;
  for (const auto& r : read_rows(path)) {
    if (std::abs(r.mu_v - 0.5) > 1e-12) continue;
    bool iy = r.inner == cli::Flag::yes;
    bool ly = r.lemma3 == cli::Flag::yes;
    require(o, !(iy && ly), fmt::format("inner and lemma3 overlap at mu_e = {}", r.mu_e));
    if (r.mu_e > 1.0 / 3.0) require(o, ly, fmt::format("lemma3 missing at mu_e = {}", r.mu_e));
    if (r.mu_e < 1.0 / 3.0) require(o, !ly, fmt::format("lemma3 below threshold at mu_e = {}", r.mu_e));
    if (r.mu_e > 1.0 / 6.0 && r.mu_e < 1.0 / 3.0) {
      require(o, iy, fmt::format("inner missing at mu_e = {}", r.mu_e));
    }
    if (r.mu_e > 1.0 / 3.0) require(o, !iy, fmt::format("inner above threshold at mu_e = {}", r.mu_e));
    inner += iy;
    l3 += ly;
    if (r.mu_e <= 1.0 / 6.0) inner_low += iy;
  }
  o.fingerprint = slurp(path) + fmt::format("{}", lo);
  if (o.pass) {
    o.detail = fmt::format(
        "threshold {:.9f}, spectral boundary {:.6f}; mu_v=0.5: inner=yes on {} points in (1/6, 1/3), "
        "lemma3=yes on {} points above 1/3; radius >= 1 for mu_e <= 1/6 ({} inner points there)",
        *t, lo, inner, l3, inner_low);
  }
  return o;
}

Outcome ferromagnetic_asymptotic() {
  Outcome o;
  std::vector<double> vals;
  for (int n : {5, 10, 20, 50, 200}) {
    auto t = lemma3_threshold(n, n * (n - 1) / 2, 0.5);
    require(o, t.has_value(), fmt::format("no threshold for complete({})", n));
    vals.push_back(t.value_or(NAN));
    o.fingerprint += fmt::format("{};", vals.back());
  }
  for (std::size_t i = 1; i < vals.size(); ++i) require(o, vals[i] < vals[i - 1], "threshold not decreasing");
  require(o, std::abs(vals[1] - 0.28125) < 1e-12, fmt::format("complete(10): {}", vals[1]));
  require(o, std::abs(vals[4] - 0.25) < 0.005, fmt::format("complete(200): {}", vals[4]));
  if (o.pass) {
    o.detail = fmt::format("thresholds {:.6f} {:.6f} {:.6f} {:.6f} {:.6f}", vals[0], vals[1], vals[2], vals[3], vals[4]);
  }
  return o;
}

Outcome figure1() {
  Outcome o;
  Graph g = torus(3, 3);
  Figure1Options fo;
  fo.theta_resolution = 0.01;
  fo.mu_resolution = 0.002;
  Figure1Result r = figure1_search(0.5, 0.40, g, fo);
  require(o, r.maximizers.size() >= 2, fmt::format("{} global maximizers", r.maximizers.size()));
  std::vector<Point2> pts;
  for (const auto& p : r.maximizers) pts.push_back({p.mu_v, p.mu_e});
  double d = distance_to_hull(pts, {0.5, 0.40});
  require(o, d <= 0.02, fmt::format("hull distance {}", d));
  require(o, r.f_max - r.f_at_mu >= 1e-3, fmt::format("F gap {}", r.f_max - r.f_at_mu));

  int code = run_cli({"figure1", "--graph", "torus:3x3", "--homogeneous", "0.5,0.40", "--out", "acc_fig1.csv"});
  require(o, code == 0, fmt::format("figure1 CLI exited {}", code));
  std::string csv = slurp("acc_fig1.csv");
  require(o, csv.find("# hull_contains_mu=true\n") != std::string::npos, "CSV summary lacks hull_contains_mu=true");
  o.fingerprint = csv;
  if (o.pass) {
    o.detail = fmt::format("theta_B = (h {}, J {}), {} maximizers, hull distance {:.4f}, F_max - F(mu) = {:.4f}", r.h,
                           r.J, r.maximizers.size(), d, r.f_max - r.f_at_mu);
  }
  return o;
}

Outcome figure2() {
  Outcome o;
  const std::string path = "acc_scan_torus_empirical.csv";
  int code = run_cli({"scan", "--graph", "torus:3x3", "--resolution", "0.01", "--empirical", "--seed", "7", "--out",
                      path});
  require(o, code == 0, fmt::format("scan exited {}", code));
  auto rows = read_rows(path);
  int inner = 0, outer = 0, rest = 0, matched = 0;
  bool center_inner = false;
  for (const auto& r : rows) {
    bool iy = r.inner == cli::Flag::yes;
    bool oy = r.lemma3 == cli::Flag::yes || r.lemma2 == cli::Flag::yes || r.lemma1 == cli::Flag::yes;
    require(o, !(iy && oy), fmt::format("inner and outer overlap at ({}, {})", r.mu_v, r.mu_e));
    if (iy) {
      ++inner;
      require(o, r.verdict == Status::LearnableInnerBound, "inner row with another verdict");
      if (std::abs(r.mu_v - 0.5) < 1e-12 && std::abs(r.mu_e - 0.25) < 1e-12) center_inner = true;
    } else if (oy) {
      ++outer;
      bool un = r.verdict == Status::UnlearnableLemma1 || r.verdict == Status::UnlearnableLemma2 ||
                r.verdict == Status::UnlearnableLemma3;
      require(o, un, "outer row with a non-unlearnable verdict");
    } else {
      ++rest;
      require(o, r.empirical_match != cli::Flag::skipped, "remainder row without the empirical stage");
      if (r.residual && *r.residual < 0.01) ++matched;
    }
  }
  require(o, inner > 0 && outer > 0 && rest > 0, fmt::format("regions {} / {} / {}", inner, outer, rest));
  require(o, center_inner, "independence point (0.5, 0.25) not inner-certified");
  auto t = lemma3_threshold(9, 18, 0.5);
  for (const auto& r : rows) {
    if (std::abs(r.mu_v - 0.5) < 1e-12 && r.mu_e > *t) {
      require(o, r.lemma3 == cli::Flag::yes, "high-mu_e point outside the outer region");
    }
  }
  double frac = rest > 0 ? double(matched) / rest : 0.0;
  require(o, frac >= 0.9, fmt::format("remainder matched fraction {:.3f}", frac));
  o.fingerprint = slurp(path);
  if (o.pass) {
    o.detail = fmt::format("inner {}, outer {}, remainder {} ({} = {:.1f}% with residual < 0.01)", inner, outer, rest,
                           matched, 100.0 * frac);
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "tree exactness", 10, tree_exactness},
      {2, "canonical moment matching on trees", 5, canonical_matching},
      {3, "hessian dual validation", 10, hessian_validation},
      {4, "lemma hierarchy", 60, lemma_hierarchy},
      {5, "tree/cycle emptiness", 60, tree_cycle_emptiness},
      {6, "torus threshold", 60, torus_threshold},
      {7, "ferromagnetic asymptotic", 1, ferromagnetic_asymptotic},
      {8, "figure 1 reproduction", 600, figure1},
      {9, "figure 2 reproduction", 1800, figure2},
  };

  auto timed = [](const Criterion& c) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && s > c.limit_s) {
      o.pass = false;
      o.detail = fmt::format("took {:.1f} s, limit {} s", s, c.limit_s);
    }
    return std::pair{o, s};
  };

  int failed = 0;
  std::vector<Outcome> first;
  for (const Criterion& c : criteria) {
    auto [o, s] = timed(c);
    std::printf("%s  %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s);
    std::fflush(stdout);
    failed += !o.pass;
    first.push_back(std::move(o));
  }

  Outcome det;
  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    auto [o, s] = timed(criteria[k]);
    (void)s;
    require(det, o.pass == first[k].pass, fmt::format("criterion {} changed outcome", criteria[k].id));
    require(det, o.fingerprint == first[k].fingerprint, fmt::format("criterion {} output differs", criteria[k].id));
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (det.pass) det.detail = "criteria 1-9 rerun: identical outputs and verdicts";
  std::printf("%s  10 determinism: %s [%.1f s]\n", det.pass ? "PASS" : "FAIL", det.detail.c_str(), s);
  failed += !det.pass;

  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
