#pragma once

#include <map>
#include <string>
#include <vector>

#include "rxnshingle/mol.hpp"

namespace rxnshingle {

enum class Side { Reactant = 0, Product = 1 };

// One circular (or ring) shingle instance. `key` is the canonical SMILES of
// the induced sub-graph and is the identity used for set algebra; atoms are
// indices into the owning molecule, sorted.
struct Shingle {
  std::string key;
  int mol_index = 0;
  Side side = Side::Reactant;
  std::vector<int> atom_indices;
  int radius = 0;  // rings use 0 with ring=true
  bool ring = false;
};

// Deduplicated, capped, canonically ordered shingle collection.
// An empty `shingles` list signals the degenerate identical-sides case; the
// encoder substitutes a learned null token, so it is not an error here.
struct ShingleSet {
  std::vector<Shingle> shingles;
  std::map<std::string, int> per_key_counts;

  bool empty() const { return shingles.empty(); }
};

inline constexpr int kPerKeyCap = 10;
inline constexpr int kPerMoleculeCap = 100;
inline constexpr int kReactionCap = 280;

// All shingles of one molecule: for every atom, the induced sub-graph over
// the ball of radius 1..r_max (an isolated atom still yields its bare-atom
// shingle), plus one shingle per SSSR ring. side/mol_index are left at their
// defaults; the set constructors below fill them in. No dedup here.
std::vector<Shingle> extract_shingles(const Conformer& mol, int r_max);

ShingleSet symmetric_difference(const std::vector<Conformer>& reactants,
                                const std::vector<Conformer>& products,
                                int r_max);
ShingleSet union_shingles(const std::vector<Conformer>& reactants,
                          const std::vector<Conformer>& products, int r_max);
ShingleSet reactant_only_shingles(const std::vector<Conformer>& reactants,
                                  int r_max);

// Sorted unique surviving keys of the symmetric difference, with no caps
// applied. This is the key set DRFP folds.
std::vector<std::string> symmetric_difference_keys(
    const std::vector<Conformer>& reactants,
    const std::vector<Conformer>& products, int r_max);

}  // namespace rxnshingle
