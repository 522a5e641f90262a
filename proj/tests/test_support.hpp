#pragma once

// Shared helpers for the test binaries: reaction builders and a small random
// reaction generator (chain molecules over C/N/O/S).

#include <string>
#include <utility>
#include <vector>

#include "rxnshingle/mol.hpp"
#include "rxnshingle/rng.hpp"
#include "rxnshingle/smiles.hpp"

namespace rxnshingle::testing {

inline Reaction make_reaction(const std::string& rxn_smiles, std::string id = "") {
  ReactionGraphs g = parse_reaction_smiles(rxn_smiles);
  Reaction rxn;
  rxn.id = std::move(id);
  for (auto& m : g.reactants) rxn.reactants.push_back({std::move(m), {}});
  for (auto& m : g.products) rxn.products.push_back({std::move(m), {}});
  return rxn;
}

inline std::string random_molecule(Rng& rng, int max_atoms) {
  static const char* atoms[] = {"C", "N", "O", "S"};
  int n = 1 + static_cast<int>(rng.uniform_int(max_atoms));
  std::string s;
  for (int i = 0; i < n; ++i) s += atoms[rng.uniform_int(4)];
  return s;
}

inline Reaction random_reaction(Rng& rng, int max_mols, int max_atoms, int idx) {
  std::string text;
  int nr = 1 + static_cast<int>(rng.uniform_int(max_mols));
  for (int i = 0; i < nr; ++i) {
    if (i) text += '.';
    text += random_molecule(rng, max_atoms);
  }
  text += ">>";
  int np = 1 + static_cast<int>(rng.uniform_int(max_mols));
  for (int i = 0; i < np; ++i) {
    if (i) text += '.';
    text += random_molecule(rng, max_atoms);
  }
  return make_reaction(text, "r" + std::to_string(idx));
}

// Shuffle molecule order within each side and relabel atoms via random
// SMILES round-trips; coords stay absent, so fallback handles geometry.
inline Reaction permuted_variant(const Reaction& rxn, Rng& rng) {
  Reaction out;
  out.id = rxn.id;
  auto scramble = [&](const std::vector<Conformer>& mols, std::vector<Conformer>& dst) {
    std::vector<int> order = rng.permutation(static_cast<int>(mols.size()));
    for (int idx : order) {
      MolGraph g = std::move(parse_smiles(random_smiles(mols[idx].graph, rng))[0]);
      dst.push_back({std::move(g), {}});
    }
  };
  scramble(rxn.reactants, out.reactants);
  scramble(rxn.products, out.products);
  return out;
}

}  // namespace rxnshingle::testing
