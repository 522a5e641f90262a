#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rxnshingle {

struct AtomSpec {
  std::string element;
  int charge = 0;
  int explicit_h = 0;
  bool aromatic = false;
  int isotope = 0;  // 0 = unspecified

  bool operator==(const AtomSpec&) const = default;
};

enum class BondOrder : uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct BondSpec {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
};

// Molecular graph with adjacency kept in sync by add_atom/add_bond.
class MolGraph {
 public:
  int add_atom(AtomSpec atom);
  void add_bond(int a, int b, BondOrder order);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const AtomSpec& atom(int i) const { return atoms_[i]; }
  AtomSpec& atom(int i) { return atoms_[i]; }
  const std::vector<AtomSpec>& atoms() const { return atoms_; }
  const BondSpec& bond(int i) const { return bonds_[i]; }
  const std::vector<BondSpec>& bonds() const { return bonds_; }

  // (neighbor atom, bond index) pairs in insertion order.
  const std::vector<std::pair<int, int>>& neighbors(int atom) const {
    return adjacency_[atom];
  }
  int degree(int atom) const { return static_cast<int>(adjacency_[atom].size()); }
  // -1 when the atoms are not bonded.
  int bond_between(int a, int b) const;

 private:
  std::vector<AtomSpec> atoms_;
  std::vector<BondSpec> bonds_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
};

// Graph distances from src (-1 for unreachable atoms).
std::vector<int> bfs_distances(const MolGraph& mol, int src);
std::vector<std::vector<int>> shortest_path_matrix(const MolGraph& mol);

// Sorted indices of atoms at graph distance <= radius from center (center included).
std::vector<int> ball(const MolGraph& mol, int center, int radius);

// Induced sub-graph over the given (sorted, unique) atom indices.
MolGraph induced_subgraph(const MolGraph& mol, const std::vector<int>& atom_indices);

// Relabel atoms: atom i of the input becomes atom new_of_old[i] of the output.
MolGraph relabel(const MolGraph& mol, const std::vector<int>& new_of_old);

bool is_connected(const MolGraph& mol);

// Per-atom flag: atom lies on at least one cycle (via bridge detection).
std::vector<char> ring_membership(const MolGraph& mol);

// Smallest set of smallest rings; each ring is a sorted atom index list.
// Deterministic for a fixed atom labeling.
std::vector<std::vector<int>> sssr(const MolGraph& mol);

}  // namespace rxnshingle
