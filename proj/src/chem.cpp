#include "rxnshingle/chem.hpp"

#include <algorithm>
#include <deque>

#include "rxnshingle/error.hpp"

namespace rxnshingle {

int MolGraph::add_atom(AtomSpec atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return static_cast<int>(atoms_.size()) - 1;
}

void MolGraph::add_bond(int a, int b, BondOrder order) {
  if (a == b || a < 0 || b < 0 || a >= atom_count() || b >= atom_count())
    fail(ErrorKind::InvalidArgument, "bad bond endpoints");
  if (bond_between(a, b) >= 0)
    fail(ErrorKind::InvalidArgument, "duplicate bond");
  const int idx = static_cast<int>(bonds_.size());
  bonds_.push_back({a, b, order});
  adjacency_[a].emplace_back(b, idx);
  adjacency_[b].emplace_back(a, idx);
}

int MolGraph::bond_between(int a, int b) const {
  for (const auto& [nbr, bidx] : adjacency_[a])
    if (nbr == b) return bidx;
  return -1;
}

std::vector<int> bfs_distances(const MolGraph& mol, int src) {
  std::vector<int> dist(mol.atom_count(), -1);
  std::deque<int> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (const auto& [nbr, bidx] : mol.neighbors(v)) {
      (void)bidx;
      if (dist[nbr] < 0) {
        dist[nbr] = dist[v] + 1;
        queue.push_back(nbr);
      }
    }
  }
  return dist;
}

std::vector<std::vector<int>> shortest_path_matrix(const MolGraph& mol) {
  std::vector<std::vector<int>> d(mol.atom_count());
  for (int i = 0; i < mol.atom_count(); ++i) d[i] = bfs_distances(mol, i);
  return d;
}

std::vector<int> ball(const MolGraph& mol, int center, int radius) {
  const auto dist = bfs_distances(mol, center);
  std::vector<int> out;
  for (int i = 0; i < mol.atom_count(); ++i)
    if (dist[i] >= 0 && dist[i] <= radius) out.push_back(i);
  return out;
}

MolGraph induced_subgraph(const MolGraph& mol, const std::vector<int>& atom_indices) {
  std::vector<int> sub_of_full(mol.atom_count(), -1);
  MolGraph sub;
  for (size_t i = 0; i < atom_indices.size(); ++i) {
    sub_of_full[atom_indices[i]] = static_cast<int>(i);
    sub.add_atom(mol.atom(atom_indices[i]));
  }
  for (const auto& b : mol.bonds()) {
    const int sa = sub_of_full[b.a], sb = sub_of_full[b.b];
    if (sa >= 0 && sb >= 0) sub.add_bond(sa, sb, b.order);
  }
  return sub;
}

MolGraph relabel(const MolGraph& mol, const std::vector<int>& new_of_old) {
  MolGraph out;
  std::vector<AtomSpec> atoms(mol.atom_count());
  for (int i = 0; i < mol.atom_count(); ++i) atoms[new_of_old[i]] = mol.atom(i);
  for (auto& a : atoms) out.add_atom(std::move(a));
  // Bonds sorted by relabeled endpoints so equal graphs build identically.
  std::vector<BondSpec> bonds;
  bonds.reserve(mol.bonds().size());
  for (const auto& b : mol.bonds()) {
    int a = new_of_old[b.a], c = new_of_old[b.b];
    if (a > c) std::swap(a, c);
    bonds.push_back({a, c, b.order});
  }
  std::sort(bonds.begin(), bonds.end(), [](const BondSpec& x, const BondSpec& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  for (const auto& b : bonds) out.add_bond(b.a, b.b, b.order);
  return out;
}

bool is_connected(const MolGraph& mol) {
  if (mol.atom_count() == 0) return true;
  const auto dist = bfs_distances(mol, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

namespace {

// Bridge detection via iterative DFS lowlink.
std::vector<char> bridge_flags(const MolGraph& mol) {
  const int n = mol.atom_count();
  std::vector<char> is_bridge(mol.bond_count(), 0);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  struct Frame {
    int v;
    int parent_bond;
    size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nbrs = mol.neighbors(f.v);
      if (f.next < nbrs.size()) {
        const auto [u, bidx] = nbrs[f.next++];
        if (bidx == f.parent_bond) continue;
        if (disc[u] < 0) {
          disc[u] = low[u] = timer++;
          stack.push_back({u, bidx, 0});
        } else {
          low[f.v] = std::min(low[f.v], disc[u]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& par = stack.back();
          low[par.v] = std::min(low[par.v], low[done.v]);
          if (low[done.v] > disc[par.v]) is_bridge[done.parent_bond] = 1;
        }
      }
    }
  }
  return is_bridge;
}

}  // namespace

std::vector<char> ring_membership(const MolGraph& mol) {
  const auto bridges = bridge_flags(mol);
  std::vector<char> in_ring(mol.atom_count(), 0);
  for (int i = 0; i < mol.bond_count(); ++i) {
    if (!bridges[i]) {
      in_ring[mol.bond(i).a] = 1;
      in_ring[mol.bond(i).b] = 1;
    }
  }
  return in_ring;
}

namespace {

// Edge set of a cycle as a bitmask over bond indices.
using EdgeMask = std::vector<uint64_t>;

EdgeMask make_mask(int nbits) { return EdgeMask((nbits + 63) / 64, 0); }
void set_bit(EdgeMask& m, int i) { m[i / 64] |= uint64_t(1) << (i % 64); }
bool any_bit(const EdgeMask& m) {
  for (uint64_t w : m)
    if (w) return true;
  return false;
}
int lowest_bit(const EdgeMask& m) {
  for (size_t w = 0; w < m.size(); ++w)
    if (m[w]) return static_cast<int>(w * 64 + __builtin_ctzll(m[w]));
  return -1;
}
void xor_into(EdgeMask& a, const EdgeMask& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
}

struct CandidateRing {
  int size = 0;
  std::vector<int> atoms;  // sorted
  EdgeMask edges;
};

}  // namespace

std::vector<std::vector<int>> sssr(const MolGraph& mol) {
  const int n = mol.atom_count();
  const int m = mol.bond_count();
  if (n == 0 || m == 0) return {};

  int components = 0;
  {
    std::vector<char> seen(n, 0);
    for (int i = 0; i < n; ++i) {
      if (seen[i]) continue;
      ++components;
      const auto dist = bfs_distances(mol, i);
      for (int j = 0; j < n; ++j)
        if (dist[j] >= 0) seen[j] = 1;
    }
  }
  const int target_rank = m - n + components;
  if (target_rank <= 0) return {};

  // Candidate cycles: for each bond, the shortest cycle through it.
  std::vector<CandidateRing> candidates;
  for (int bidx = 0; bidx < m; ++bidx) {
    const auto& b = mol.bond(bidx);
    // BFS from b.a to b.b avoiding bond bidx.
    std::vector<int> parent_atom(n, -2), parent_bond(n, -1);
    std::deque<int> queue{b.a};
    parent_atom[b.a] = -1;
    while (!queue.empty() && parent_atom[b.b] == -2) {
      const int v = queue.front();
      queue.pop_front();
      for (const auto& [u, eidx] : mol.neighbors(v)) {
        if (eidx == bidx || parent_atom[u] != -2) continue;
        parent_atom[u] = v;
        parent_bond[u] = eidx;
        queue.push_back(u);
      }
    }
    if (parent_atom[b.b] == -2) continue;  // bridge, no cycle
    CandidateRing ring;
    ring.edges = make_mask(m);
    set_bit(ring.edges, bidx);
    ring.atoms.push_back(b.b);
    for (int v = b.b; parent_atom[v] != -1; v = parent_atom[v]) {
      set_bit(ring.edges, parent_bond[v]);
      ring.atoms.push_back(parent_atom[v]);
    }
    std::sort(ring.atoms.begin(), ring.atoms.end());
    ring.size = static_cast<int>(ring.atoms.size());
    candidates.push_back(std::move(ring));
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const CandidateRing& x, const CandidateRing& y) {
              if (x.size != y.size) return x.size < y.size;
              return x.atoms < y.atoms;
            });

  // Greedy GF(2) independence over edge sets.
  std::vector<EdgeMask> basis;      // reduced rows
  std::vector<int> basis_pivot;     // pivot bond index per row
  std::vector<std::vector<int>> rings;
  for (const auto& cand : candidates) {
    EdgeMask reduced = cand.edges;
    for (size_t r = 0; r < basis.size(); ++r) {
      if (reduced[basis_pivot[r] / 64] >> (basis_pivot[r] % 64) & 1)
        xor_into(reduced, basis[r]);
    }
    if (!any_bit(reduced)) continue;
    basis.push_back(reduced);
    basis_pivot.push_back(lowest_bit(reduced));
    // Dedup identical atom sets (possible for equal-size alternatives).
    if (std::find(rings.begin(), rings.end(), cand.atoms) == rings.end())
      rings.push_back(cand.atoms);
    if (static_cast<int>(basis.size()) == target_rank) break;
  }
  std::sort(rings.begin(), rings.end(), [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return x.size() < y.size();
    return x < y;
  });
  return rings;
}

}  // namespace rxnshingle
