#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rxnshingle/chem.hpp"

namespace rxnshingle {

using Vec3 = std::array<double, 3>;

// Molecule plus optional 3D coordinates in Angstrom. Empty coords = absent.
struct Conformer {
  MolGraph graph;
  std::vector<Vec3> coords;

  bool has_coords() const { return !coords.empty(); }
};

struct Reaction {
  std::vector<Conformer> reactants;
  std::vector<Conformer> products;
  std::string id;
};

struct LabeledReaction {
  Reaction reaction;
  std::optional<double> label;  // regression value or class index
};

enum class SplitKind { Random, OutOfSample };

struct DatasetSplit {
  std::vector<LabeledReaction> train;
  std::vector<LabeledReaction> test;
  SplitKind kind = SplitKind::Random;
};

// Deterministic pseudo-coordinates: classical MDS on 1.5x the shortest-path
// matrix, at most 3 dimensions. Bonded atoms land ~1.5 apart. The embedding
// never splits a degenerate eigenvalue block, so reconstructed distances are
// stable under atom relabeling.
Conformer fallback_coords(const MolGraph& mol);

// Relabeling-invariant atom order for one molecule. With coordinates present
// the order is (refinement rank, coords, input index) and coordinates travel
// with their atoms; without, the canonical-SMILES ranks are used and fallback
// coordinates are synthesized on the reordered graph. Either way two relabeled
// copies of the same physical molecule produce bitwise identical output, which
// is what makes the whole featurization pipeline bit-exact under permutation.
Conformer canonical_conformer(const Conformer& mol);

// canonical_conformer on every molecule, then each side sorted by
// (canonical SMILES, coords, input position). Output conformers always carry
// coordinates.
Reaction canonical_reaction(const Reaction& rxn);

DatasetSplit split_random(const std::vector<LabeledReaction>& data,
                          double test_fraction, std::uint64_t seed);

// Reactions containing any pivot molecule (matched by canonical SMILES of
// every molecule on either side) go to test, the rest to train.
DatasetSplit split_by_pivot(const std::vector<LabeledReaction>& data,
                            const std::vector<std::string>& pivot_smiles);

}  // namespace rxnshingle
