#include <doctest.h>

#include <cmath>
#include <random>

#include "bethe/error.hpp"
#include "bethe/learnability.hpp"
#include "oracle.hpp"

using namespace bethe;

TEST_SUITE("learnability") {

TEST_CASE("hessian is symmetric with the graph's sparsity") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    Graph g = oracle::random_loopy(7, 3, rng);
    MinimalMarginals mu = oracle::random_marginals(g, 0.02, rng);
    HessianMatrix A = bethe_entropy_hessian(mu, g);
    const int nv = g.num_nodes();
    const int ne = g.num_edges();
    REQUIRE(A.rows() == nv + ne);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < nv; ++i) {
      for (int j = 0; j < nv; ++j) {
        if (i != j && g.find_edge(i, j) < 0) CHECK(A(i, j) == 0.0);
      }
      for (int e = 0; e < ne; ++e) {
        bool incident = g.edge(e).u == i || g.edge(e).v == i;
        if (!incident) CHECK(A(i, nv + e) == 0.0);
      }
    }
    for (int e = 0; e < ne; ++e) {
      for (int f = 0; f < ne; ++f) {
        if (e != f) CHECK(A(nv + e, nv + f) == 0.0);
      }
    }
  }
}

TEST_CASE("hessian matches finite differences") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    Graph g = rep % 2 ? oracle::random_loopy(6, 4, rng) : torus(3, 3);
    MinimalMarginals mu = oracle::random_marginals(g, 0.05, rng);
    double err = (bethe_entropy_hessian(mu, g) - oracle::fd_hessian(g, mu)).cwiseAbs().maxCoeff();
    CHECK(err < 1e-4);
  }
}

TEST_CASE("homogeneous hessian construction agrees") {
  for (Graph g : {torus(3, 3), cycle(6), complete(5), chain(4)}) {
    for (double mv : {0.2, 0.5, 0.7}) {
      for (double me : {0.45 * mv, 0.8 * mv}) {
        if (me <= std::max(0.0, 2 * mv - 1)) continue;
        MinimalMarginals mu = homogeneous_marginals(g, mv, me);
        double err = (bethe_entropy_hessian(mu, g) - homogeneous_hessian(g, mv, me)).cwiseAbs().maxCoeff();
        CHECK(err <= 1e-12);
      }
    }
  }
  HomogeneousHessian h = homogeneous_hessian_values(0.5, 0.3);
  CHECK(h.a_hat == doctest::Approx(4.0));
  CHECK(h.b == doctest::Approx(-1.0 / 0.3));
  CHECK(h.c == doctest::Approx(1.0 / 0.2 + 1.0 / 0.3));
  CHECK(h.a(4) == doctest::Approx(3 * 4.0 - 4 * h.c));
}

TEST_CASE("lemma 3 closed form") {
  auto t = lemma3_threshold(9, 18, 0.5);
  REQUIRE(t.has_value());
  CHECK(std::abs(*t - 1.0 / 3.0) < 1e-12);
  CHECK(lemma3_test(9, 18, 0.5, 0.45).unlearnable);
  CHECK_FALSE(lemma3_test(9, 18, 0.5, 0.30).unlearnable);
  CHECK_FALSE(lemma3_test(9, 18, 0.3, 0.16).unlearnable);  // exactly on the boundary

  auto k10 = lemma3_threshold(10, 45, 0.5);
  REQUIRE(k10.has_value());
  CHECK(std::abs(*k10 - 0.28125) < 1e-12);

  CHECK_FALSE(lemma3_threshold(6, 6, 0.5).has_value());
  CHECK_FALSE(lemma3_threshold(5, 4, 0.5).has_value());
  CHECK_THROWS_AS(lemma3_test(9, 18, 0.5, 0.6), PolytopeError);
  CHECK_THROWS_AS(lemma3_test(9, 0, 0.5, 0.3), InputError);
}

TEST_CASE("lemma 3 discriminant has the sign of the closed form") {
  const int n = 50;
  for (int k = 1; k < n; ++k) {
    for (int m = std::max(0, 2 * k - n) + 1; m < k; ++m) {
      long long exact = oracle::lemma3_lhs_scaled(9, 18, n, k, m);
      if (exact == 0) continue;
      double d = lemma3_discriminant(9, 18, double(k) / n, double(m) / n);
      CHECK((d > 0) == (exact > 0));
    }
  }
}

TEST_CASE("lemma 3 implies lemma 2") {
  Graph g = torus(3, 3);
  const int n = 40;
  int hits = 0;
  for (int k = 1; k < n; ++k) {
    for (int m = std::max(0, 2 * k - n) + 1; m < k; ++m) {
      double mv = double(k) / n, me = double(m) / n;
      if (!lemma3_test(9, 18, mv, me).unlearnable) continue;
      ++hits;
      CHECK(lemma2_test(homogeneous_marginals(g, mv, me), g).max_eigenvalue > kEigTol);
    }
  }
  CHECK(hits > 0);
}

TEST_CASE("lemma 2 never fires on trees or single cycles") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    Graph g = rep % 2 ? oracle::random_tree(7, rng) : cycle(3 + rep % 6);
    MinimalMarginals mu = oracle::random_marginals(g, 0.01, rng);
    CHECK(lemma2_test(mu, g).max_eigenvalue <= kEigTol);
  }
}

TEST_CASE("nonbacktracking radius matches a dense eigensolver") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Graph g = rep < 5 ? oracle::random_tree(6, rng) : oracle::random_loopy(7, 1 + rep % 5, rng);
    std::vector<double> w(g.num_edges());
    for (double& x : w) x = U(rng);
    double expect = oracle::nonbacktracking_radius(g, w);
    if (g.is_tree()) {
      // Dense eigensolvers resolve nilpotent matrices only to ~eps^(1/k).
      CHECK(nonbacktracking_spectral_radius(g, w) == 0.0);
      CHECK(expect < 1e-3);
    } else {
      CHECK(std::abs(nonbacktracking_spectral_radius(g, w) - expect) < 1e-8);
    }
  }
  CHECK(nonbacktracking_spectral_radius(chain(5), {0.9, 0.9, 0.9, 0.9}) == 0.0);
}

TEST_CASE("inner bound on the torus at mu_v = 0.5") {
  Graph g = torus(3, 3);
  for (double me : {0.05, 0.1, 0.2, 0.25, 0.3, 0.33, 0.4}) {
    InnerBoundResult r = inner_bound_unique(canonical_parameters(homogeneous_marginals(g, 0.5, me), g), g);
    CHECK(std::abs(r.spectral_radius - 3 * std::abs(4 * me - 1)) < 1e-9);
    CHECK(r.learnable_certificate == (3 * std::abs(4 * me - 1) < 1));
  }
}

TEST_CASE("lemma 1 witnesses") {
  Graph g = torus(3, 3);
  Lemma1Result hi = lemma1_test(homogeneous_marginals(g, 0.5, 0.45), g, {}, 20, 0);
  CHECK(hi.unlearnable);
  CHECK(hi.witnesses.size() >= 1);
  for (const auto& w : hi.witnesses) CHECK(w.free_energy > hi.f_at_mu + kLemma1Margin);
  CHECK(std::abs(hi.f_at_mu) < 1e-12);  // F(mu; theta^c(mu)) vanishes identically

  Lemma1Result lo = lemma1_test(homogeneous_marginals(g, 0.5, 0.3), g, {}, 20, 0);
  CHECK_FALSE(lo.unlearnable);
  CHECK(lo.fixed_points == 1);
}

TEST_CASE("classify precedence") {
  Graph g = torus(3, 3);
  ClassifyOptions o;
  o.empirical = false;
  Verdict a = classify(homogeneous_marginals(g, 0.5, 0.45), g, o);
  CHECK(a.status == Status::UnlearnableLemma3);
  CHECK(a.evidence.lemma3.has_value());
  CHECK_FALSE(a.evidence.lemma2.has_value());

  Verdict b = classify(homogeneous_marginals(g, 0.5, 0.3), g, o);
  CHECK(b.status == Status::LearnableInnerBound);
  CHECK_FALSE(b.evidence.lemma1.has_value());

  o.exhaustive = true;
  Verdict c = classify(homogeneous_marginals(g, 0.5, 0.45), g, o);
  CHECK(c.status == Status::UnlearnableLemma3);
  CHECK(c.evidence.lemma2->unlearnable);
  CHECK(c.evidence.lemma1->unlearnable);
  CHECK_FALSE(c.evidence.inner->learnable_certificate);

  Verdict d = classify(homogeneous_marginals(g, 0.5, 0.1), g, o);
  CHECK(d.status == Status::Undetermined);

  CHECK(classify(homogeneous_marginals(chain(5), 0.3, 0.2), chain(5), o).status == Status::LearnableInnerBound);
  CHECK_THROWS_AS(classify(homogeneous_marginals(g, 0.5, 0.5), g, o), PolytopeError);
}

TEST_CASE("inner certificate and unlearnability bounds are disjoint") {
  std::mt19937_64 rng(77);
  ClassifyOptions o;
  o.empirical = false;
  o.exhaustive = true;
  o.restarts = 8;
  int inner = 0, unlearn = 0;
  for (int rep = 0; rep < 40; ++rep) {
    Graph g = rep % 2 ? torus(3, 3) : oracle::random_loopy(7, 5, rng);
    MinimalMarginals mu = oracle::random_marginals(g, 0.01, rng);
    Verdict v = classify(mu, g, o);
    bool un = v.evidence.lemma2->unlearnable || v.evidence.lemma1->unlearnable ||
              (v.evidence.lemma3 && v.evidence.lemma3->unlearnable);
    CHECK_FALSE((un && v.evidence.inner->learnable_certificate));
    inner += v.evidence.inner->learnable_certificate;
    unlearn += un;
  }
  CHECK(inner > 0);
  CHECK(unlearn > 0);
}

TEST_CASE("status names") {
  CHECK(std::string(to_string(Status::UnlearnableLemma3)) == "UnlearnableLemma3");
  CHECK(std::string(to_string(Status::LearnableInnerBound)) == "LearnableInnerBound");
  CHECK(std::string(to_string(Status::Undetermined)) == "Undetermined");
}

}
