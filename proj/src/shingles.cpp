#include "rxnshingle/shingles.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "rxnshingle/error.hpp"
#include "rxnshingle/smiles.hpp"

namespace rxnshingle {
namespace {

std::vector<Shingle> collect_side(const std::vector<Conformer>& side,
                                  Side which, int r_max) {
  std::vector<Shingle> out;
  for (size_t m = 0; m < side.size(); ++m) {
    auto shingles = extract_shingles(side[m], r_max);
    for (auto& s : shingles) {
      s.side = which;
      s.mol_index = static_cast<int>(m);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::set<std::string> key_set(const std::vector<Shingle>& shingles) {
  std::set<std::string> keys;
  for (const auto& s : shingles) keys.insert(s.key);
  return keys;
}

bool shingle_order(const Shingle& a, const Shingle& b) {
  if (a.key != b.key) return a.key < b.key;
  if (a.side != b.side) return a.side < b.side;
  if (a.mol_index != b.mol_index) return a.mol_index < b.mol_index;
  // atom_indices are sorted, so lexicographic comparison starts at the min
  // atom index and settles any remaining ties deterministically.
  return a.atom_indices < b.atom_indices;
}

// Dedup (same physical atom set reached at several radii counts once), sort
// canonically, then apply the caps: first at most kPerKeyCap instances per
// key, then walk the list dropping shingles from molecules that already
// contributed kPerMoleculeCap and stopping at kReactionCap total.
ShingleSet assemble(std::vector<Shingle> picked) {
  std::sort(picked.begin(), picked.end(), shingle_order);
  std::vector<Shingle> unique;
  std::set<std::tuple<Side, int, std::vector<int>>> seen;
  for (auto& s : picked)
    if (seen.insert({s.side, s.mol_index, s.atom_indices}).second)
      unique.push_back(std::move(s));

  ShingleSet set;
  std::map<std::string, int> key_counts;
  std::map<std::pair<Side, int>, int> mol_counts;
  std::vector<Shingle> capped;
  for (auto& s : unique)
    if (key_counts[s.key]++ < kPerKeyCap) capped.push_back(std::move(s));
  for (auto& s : capped) {
    if (static_cast<int>(set.shingles.size()) >= kReactionCap) break;
    if (mol_counts[{s.side, s.mol_index}]++ >= kPerMoleculeCap) continue;
    set.per_key_counts[s.key]++;
    set.shingles.push_back(std::move(s));
  }
  return set;
}

}  // namespace

std::vector<Shingle> extract_shingles(const Conformer& mol, int r_max) {
  if (r_max < 1) fail(ErrorKind::InvalidArgument, "r_max must be >= 1");
  const auto& g = mol.graph;
  const int n = static_cast<int>(g.atom_count());
  std::vector<Shingle> out;
  for (int v = 0; v < n; ++v) {
    for (int r = 1; r <= r_max; ++r) {
      Shingle s;
      s.atom_indices = ball(g, v, r);
      s.key = canonical_smiles(induced_subgraph(g, s.atom_indices));
      s.radius = r;
      out.push_back(std::move(s));
    }
  }
  for (const auto& ring : sssr(g)) {
    Shingle s;
    s.atom_indices = ring;
    s.key = canonical_smiles(induced_subgraph(g, s.atom_indices));
    s.radius = 0;
    s.ring = true;
    out.push_back(std::move(s));
  }
  return out;
}

ShingleSet symmetric_difference(const std::vector<Conformer>& reactants,
                                const std::vector<Conformer>& products,
                                int r_max) {
  if (reactants.empty())
    fail(ErrorKind::EmptyReactantSide, "symmetric_difference: no reactants");
  if (products.empty())
    fail(ErrorKind::EmptyProductSide, "symmetric_difference: no products");
  auto rs = collect_side(reactants, Side::Reactant, r_max);
  auto ps = collect_side(products, Side::Product, r_max);
  const auto rk = key_set(rs), pk = key_set(ps);
  std::vector<Shingle> picked;
  for (auto& s : rs)
    if (!pk.count(s.key)) picked.push_back(std::move(s));
  for (auto& s : ps)
    if (!rk.count(s.key)) picked.push_back(std::move(s));
  return assemble(std::move(picked));
}

ShingleSet union_shingles(const std::vector<Conformer>& reactants,
                          const std::vector<Conformer>& products, int r_max) {
  auto picked = collect_side(reactants, Side::Reactant, r_max);
  auto ps = collect_side(products, Side::Product, r_max);
  picked.insert(picked.end(), std::make_move_iterator(ps.begin()),
                std::make_move_iterator(ps.end()));
  return assemble(std::move(picked));
}

ShingleSet reactant_only_shingles(const std::vector<Conformer>& reactants,
                                  int r_max) {
  return assemble(collect_side(reactants, Side::Reactant, r_max));
}

std::vector<std::string> symmetric_difference_keys(
    const std::vector<Conformer>& reactants,
    const std::vector<Conformer>& products, int r_max) {
  const auto rk = key_set(collect_side(reactants, Side::Reactant, r_max));
  const auto pk = key_set(collect_side(products, Side::Product, r_max));
  std::vector<std::string> keys;
  std::set_symmetric_difference(rk.begin(), rk.end(), pk.begin(), pk.end(),
                                std::back_inserter(keys));
  return keys;
}

}  // namespace rxnshingle
