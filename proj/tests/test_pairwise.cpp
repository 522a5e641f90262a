#include <cmath>
#include <vector>

#include "doctest.h"
#include "rxnshingle/mol.hpp"
#include "rxnshingle/pairwise.hpp"
#include "rxnshingle/shingles.hpp"
#include "rxnshingle/smiles.hpp"
#include "test_support.hpp"

using namespace rxnshingle;
using rxnshingle::testing::make_reaction;

TEST_CASE("pair feature matrix properties") {
  Reaction rxn = canonical_reaction(make_reaction("CCO.CC>>CC=O"));
  auto ss = symmetric_difference(rxn.reactants, rxn.products, 2);
  auto pf = pair_features(ss, rxn);
  REQUIRE(pf.n == static_cast<int>(ss.shingles.size()));
  REQUIRE(pf.d_g.size() == static_cast<size_t>(pf.n) * pf.n);
  for (int i = 0; i < pf.n; ++i) {
    CHECK(pf.d_g[i * pf.n + i] == 0.0);
    CHECK(pf.d_e[i * pf.n + i] == 1.0);
    CHECK(pf.d_s[i * pf.n + i] == 0.0);
  }
  bool any_same_mol = false, any_cross = false;
  for (int i = 0; i < pf.n; ++i)
    for (int j = 0; j < pf.n; ++j) {
      CHECK(pf.d_g[i * pf.n + j] == pf.d_g[j * pf.n + i]);
      CHECK(pf.d_e[i * pf.n + j] == pf.d_e[j * pf.n + i]);
      CHECK(std::fabs(pf.d_s[i * pf.n + j] - pf.d_s[j * pf.n + i]) < 1e-15);
      CHECK((pf.d_e[i * pf.n + j] == 0.0 || pf.d_e[i * pf.n + j] == 1.0));
      // geometric distance only within a molecule
      if (pf.d_e[i * pf.n + j] == 0.0) {
        CHECK(pf.d_g[i * pf.n + j] == 0.0);
        any_cross = true;
      } else if (i != j) {
        any_same_mol = true;
      }
      CHECK(pf.d_s[i * pf.n + j] >= 0.0);
      CHECK(pf.d_s[i * pf.n + j] <= 1.0);
      CHECK(pf.d_g[i * pf.n + j] >= 0.0);
    }
  CHECK(any_cross);
  CHECK(any_same_mol);
}

TEST_CASE("empty shingle set maps to the 1x1 null token") {
  Reaction rxn = canonical_reaction(make_reaction("CCO>>CCO"));
  ShingleSet empty;
  auto pf = pair_features(empty, rxn);
  CHECK(pf.n == 1);
  CHECK(pf.d_e[0] == 1.0);
  CHECK(pf.d_g[0] == 0.0);
  CHECK(pf.d_s[0] == 0.0);
}

TEST_CASE("gkpt evaluates a gaussian bank") {
  GkptParams p = init_gkpt_grid(1, 2, 0.0, 1.0);
  p.mu[0] = 0.0;
  p.sigma[0] = 1.0;
  auto vals = gkpt(0.0, 1, p);
  REQUIRE(vals.size() == 1);
  // standard normal density at 0
  CHECK(std::fabs(vals[0] - 0.3989422804014327) < 1e-15);
  // pair types select different affine rows once e1/e2 differ
  GkptParams q = init_gkpt_grid(1, 1, 0.0, 1.0);
  q.mu[0] = 0.0;
  q.sigma[0] = 1.0;
  q.e1 = {1.0, 2.0};
  q.e2 = {0.0, 0.5};
  CHECK(gkpt(0.3, 0, q)[0] != gkpt(0.3, 1, q)[0]);
  // sigma is floored, not divided by zero
  GkptParams z = init_gkpt_grid(1, 1, 0.0, 1.0);
  z.mu[0] = 0.0;
  z.sigma[0] = 0.0;
  CHECK(std::isfinite(gkpt(0.1, 0, z)[0]));
}

TEST_CASE("init_gkpt_grid lays mu on an even grid") {
  GkptParams p = init_gkpt_grid(5, 3, 0.0, 10.0);
  REQUIRE(p.mu.size() == 5);
  CHECK(p.K == 5);
  CHECK(p.heads == 3);
  for (int k = 1; k < 5; ++k)
    CHECK(std::fabs((p.mu[k] - p.mu[k - 1]) - p.sigma[0]) < 1e-12);
  CHECK(p.mu.front() == 0.0);
  CHECK(p.mu.back() == 10.0);
  for (double w : p.w) CHECK(w == 0.0);
}

TEST_CASE("initial bias: zero projection gives zero bias, else symmetric") {
  Reaction rxn = canonical_reaction(make_reaction("CCO.CC>>CC=O"));
  auto ss = symmetric_difference(rxn.reactants, rxn.products, 2);
  auto pf = pair_features(ss, rxn);
  auto pg = init_gkpt_grid(4, 2, 0.0, 10.0);
  auto psr = init_gkpt_grid(4, 2, 0.0, 1.0);
  auto p0 = initial_bias(pf, pg, psr, 2);
  CHECK(p0.size() == static_cast<size_t>(2) * pf.n * pf.n);
  for (double v : p0) CHECK(v == 0.0);

  for (auto& v : pg.w) v = 0.3;
  for (auto& v : psr.w) v = -0.1;
  auto p1 = initial_bias(pf, pg, psr, 2);
  bool any_nonzero = false;
  for (double v : p1)
    if (v != 0.0) any_nonzero = true;
  CHECK(any_nonzero);
  for (int h = 0; h < 2; ++h)
    for (int i = 0; i < pf.n; ++i)
      for (int j = 0; j < pf.n; ++j)
        CHECK(std::fabs(p1[(h * pf.n + i) * pf.n + j] -
                        p1[(h * pf.n + j) * pf.n + i]) < 1e-12);
}
