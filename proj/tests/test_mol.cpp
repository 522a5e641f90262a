#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "rxnshingle/error.hpp"
#include "rxnshingle/mol.hpp"
#include "rxnshingle/rng.hpp"
#include "rxnshingle/smiles.hpp"
#include "test_support.hpp"

using namespace rxnshingle;
using rxnshingle::testing::make_reaction;

static double dist(const Conformer& c, int i, int j) {
  double s = 0;
  for (int k = 0; k < 3; ++k) {
    double t = c.coords[i][k] - c.coords[j][k];
    s += t * t;
  }
  return std::sqrt(s);
}

TEST_CASE("graph utilities") {
  auto mol = parse_smiles("CC(C)CO")[0];
  CHECK(bfs_distances(mol, 0) == std::vector<int>{0, 1, 2, 2, 3});
  CHECK(ball(mol, 0, 1) == std::vector<int>{0, 1});
  CHECK(ball(mol, 1, 1) == std::vector<int>{0, 1, 2, 3});
  auto sub = induced_subgraph(mol, {1, 2, 3});
  CHECK(sub.atom_count() == 3);
  CHECK(sub.bond_count() == 2);
  CHECK(is_connected(mol));
  auto ring = parse_smiles("C1CC1C")[0];
  auto member = ring_membership(ring);
  CHECK(member == std::vector<char>{1, 1, 1, 0});
  auto rings = sssr(ring);
  REQUIRE(rings.size() == 1);
  CHECK(rings[0] == std::vector<int>{0, 1, 2});
  CHECK(sssr(parse_smiles("c1ccc2ccccc2c1")[0]).size() == 2);  // naphthalene
  CHECK(sssr(parse_smiles("CCCC")[0]).empty());
}

TEST_CASE("fallback coords reproduce bond-length scale") {
  auto cc = fallback_coords(parse_smiles("CC")[0]);
  CHECK(std::fabs(dist(cc, 0, 1) - 1.5) < 1e-9);
  // a chain embeds nearly straight: ends land close to 3 bonds * 1.5
  auto chain = fallback_coords(parse_smiles("CCCC")[0]);
  CHECK(std::fabs(dist(chain, 0, 3) - 4.5) < 0.45);
  auto single = fallback_coords(parse_smiles("C")[0]);
  CHECK(single.coords[0] == (Vec3{0, 0, 0}));
}

TEST_CASE("fallback coords: pairwise distances invariant under relabeling") {
  Rng rng(11);
  for (const char* s : {"C1CCCCCCC1", "c1ccccc1", "CC(C)(C)C", "C1CC1CCO"}) {
    auto mol = parse_smiles(s)[0];
    auto base = fallback_coords(mol);
    const int n = mol.atom_count();
    for (int t = 0; t < 25; ++t) {
      auto p = rng.permutation(n);
      auto shuffled = fallback_coords(relabel(mol, p));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          CHECK(std::fabs(dist(shuffled, p[i], p[j]) - dist(base, i, j)) < 1e-9);
    }
  }
}

TEST_CASE("canonical_conformer is bitwise stable across relabelings") {
  Rng rng(5);
  for (const char* s : {"CCO", "c1ccccc1", "C1CCCCCCC1", "CC(=O)Oc1ccccc1C(=O)O"}) {
    auto mol = parse_smiles(s)[0];
    Conformer base;
    base.graph = mol;
    auto ref = canonical_conformer(base);
    for (int t = 0; t < 25; ++t) {
      auto p = rng.permutation(mol.atom_count());
      Conformer variant;
      variant.graph = relabel(mol, p);
      auto got = canonical_conformer(variant);
      CHECK(canonical_smiles(got.graph) == canonical_smiles(ref.graph));
      REQUIRE(got.coords.size() == ref.coords.size());
      bool same = true;
      for (size_t i = 0; i < ref.coords.size(); ++i)
        for (int k = 0; k < 3; ++k)
          if (got.coords[i][k] != ref.coords[i][k]) same = false;
      CHECK(same);
      REQUIRE(got.graph.bonds().size() == ref.graph.bonds().size());
      for (size_t b = 0; b < ref.graph.bonds().size(); ++b) {
        CHECK(got.graph.bond(b).a == ref.graph.bond(b).a);
        CHECK(got.graph.bond(b).b == ref.graph.bond(b).b);
        CHECK(got.graph.bond(b).order == ref.graph.bond(b).order);
      }
    }
  }
}

TEST_CASE("canonical_conformer: coords break automorphism ties and travel") {
  auto mol = parse_smiles("C1CCCCCCC1")[0];  // all atoms automorphic
  auto base = fallback_coords(mol);          // distinct coords per atom
  auto ref = canonical_conformer(base);
  Rng rng(13);
  for (int t = 0; t < 25; ++t) {
    auto p = rng.permutation(8);
    Conformer variant;
    variant.graph = relabel(mol, p);
    variant.coords.resize(8);
    for (int i = 0; i < 8; ++i) variant.coords[p[i]] = base.coords[i];
    CHECK(canonical_conformer(variant).coords == ref.coords);
  }
}

TEST_CASE("canonical_reaction sorts molecules and is stable") {
  Reaction a = make_reaction("CCO.CC>>CC=O");
  Reaction b = make_reaction("CC.CCO>>CC=O");
  Reaction ca = canonical_reaction(a), cb = canonical_reaction(b);
  REQUIRE(ca.reactants.size() == 2);
  for (size_t m = 0; m < ca.reactants.size(); ++m) {
    CHECK(canonical_smiles(ca.reactants[m].graph) ==
          canonical_smiles(cb.reactants[m].graph));
    CHECK(ca.reactants[m].coords == cb.reactants[m].coords);
  }
  for (const auto& mol : ca.reactants) CHECK(mol.has_coords());
}

TEST_CASE("random split is seeded and sized by floor(n*(1-frac))") {
  std::vector<LabeledReaction> data;
  for (int i = 0; i < 10; ++i) {
    LabeledReaction lr;
    lr.reaction = make_reaction(i < 3 ? "CCO>>CC=O" : "CC>>C=C", "r" + std::to_string(i));
    lr.label = i;
    data.push_back(lr);
  }
  auto s = split_random(data, 0.3, 1);
  CHECK(s.train.size() == 7);
  CHECK(s.test.size() == 3);
  auto s2 = split_random(data, 0.3, 1);
  bool same_ids = s.train.size() == s2.train.size();
  for (size_t i = 0; same_ids && i < s.train.size(); ++i)
    same_ids = s.train[i].reaction.id == s2.train[i].reaction.id;
  CHECK(same_ids);
  auto s3 = split_random(data, 0.3, 2);
  bool differs = false;
  for (size_t i = 0; i < s.train.size(); ++i)
    if (s.train[i].reaction.id != s3.train[i].reaction.id) differs = true;
  CHECK(differs);
}

TEST_CASE("pivot split matches molecules by canonical smiles") {
  std::vector<LabeledReaction> data;
  for (int i = 0; i < 10; ++i) {
    LabeledReaction lr;
    lr.reaction = make_reaction(i < 3 ? "CCO>>CC=O" : "CC>>C=C", "r" + std::to_string(i));
    lr.label = i;
    data.push_back(lr);
  }
  auto sp = split_by_pivot(data, {"OCC"});  // non-canonical spelling still matches
  CHECK(sp.train.size() == 7);
  CHECK(sp.test.size() == 3);
  CHECK(sp.kind == SplitKind::OutOfSample);
  try {
    split_by_pivot(data, {"CCCCCC"});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSplit);
  }
}
