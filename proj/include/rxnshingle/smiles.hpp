#pragma once

#include <string>
#include <vector>

#include "rxnshingle/chem.hpp"
#include "rxnshingle/rng.hpp"

namespace rxnshingle {

// One MolGraph per dot-separated fragment.  Stereo tokens are dropped with a
// note appended to *warnings when given.
std::vector<MolGraph> parse_smiles(const std::string& text,
                                   std::vector<std::string>* warnings = nullptr);

struct ReactionGraphs {
  std::vector<MolGraph> reactants;  // agents (middle segment) merged in
  std::vector<MolGraph> products;
};

ReactionGraphs parse_reaction_smiles(const std::string& text,
                                     std::vector<std::string>* warnings = nullptr);

// Canonical SMILES, invariant under atom relabeling.
std::string canonical_smiles(const MolGraph& mol);

struct CanonicalResult {
  std::string smiles;
  std::vector<int> ranks;  // ranks[i] = canonical position of atom i
};
CanonicalResult canonicalize(const MolGraph& mol);

// Morgan-style refinement ranks only (ties possible; lower = earlier).
std::vector<int> refined_ranks(const MolGraph& mol);

// Writers. write_smiles emits in input atom order; random_smiles draws the
// start atom and neighbor order from rng. Both round-trip through parse_smiles.
std::string write_smiles(const MolGraph& mol);
std::string random_smiles(const MolGraph& mol, Rng& rng);

// Stable index of an element symbol (alphabetical over the periodic table),
// -1 if unknown. Used for atom-type bucketing.
int element_index(const std::string& symbol);
int element_count();

}  // namespace rxnshingle
