#include "rxnshingle/mol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rxnshingle/error.hpp"
#include "rxnshingle/rng.hpp"
#include "rxnshingle/smiles.hpp"

namespace rxnshingle {
namespace {

// Cyclic Jacobi eigensolver for a symmetric matrix, row-major in `a` (which is
// destroyed: eigenvalues end up on its diagonal). Columns of `v` are the
// eigenvectors. Hand-rolled instead of a BLAS/LAPACK dependency because the
// pipeline's bit-exactness contract needs full control over operation order.
void jacobi_eigen(std::vector<double>& a, int n, std::vector<double>& v) {
  v.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;
  auto A = [&](int r, int c) -> double& { return a[static_cast<size_t>(r) * n + c]; };
  auto V = [&](int r, int c) -> double& { return v[static_cast<size_t>(r) * n + c]; };

  double fro = 0.0;
  for (double x : a) fro += x * x;
  const double stop = std::max(fro * 1e-28, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off * 2.0 <= stop) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
}

std::string flatten_coords_key(const std::vector<Vec3>& coords) {
  // Bit-faithful lexicographic key over the raw coordinate doubles.
  std::string key;
  key.reserve(coords.size() * 24);
  char buf[32];
  for (const auto& p : coords)
    for (double x : p) {
      std::snprintf(buf, sizeof(buf), "%.17g,", x);
      key += buf;
    }
  return key;
}

}  // namespace

Conformer fallback_coords(const MolGraph& mol) {
  Conformer out;
  out.graph = mol;
  const int n = static_cast<int>(mol.atom_count());
  out.coords.assign(static_cast<size_t>(n), Vec3{0.0, 0.0, 0.0});
  if (n <= 1) return out;

  const auto sp = shortest_path_matrix(mol);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (sp[static_cast<size_t>(i)][static_cast<size_t>(j)] < 0)
        fail(ErrorKind::InvalidArgument,
             "fallback_coords requires a connected graph");

  // Classical MDS: B = -1/2 J D^2 J with D = 1.5 * graph distance.
  std::vector<double> d2(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = 1.5 * sp[static_cast<size_t>(i)][static_cast<size_t>(j)];
      d2[static_cast<size_t>(i) * n + j] = d * d;
    }
  std::vector<double> row_mean(static_cast<size_t>(n), 0.0);
  double grand = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += d2[static_cast<size_t>(i) * n + j];
    row_mean[static_cast<size_t>(i)] = s / n;
    grand += s;
  }
  grand /= static_cast<double>(n) * n;
  std::vector<double> b(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b[static_cast<size_t>(i) * n + j] =
          -0.5 * (d2[static_cast<size_t>(i) * n + j] -
                  row_mean[static_cast<size_t>(i)] -
                  row_mean[static_cast<size_t>(j)] + grand);

  std::vector<double> vecs;
  jacobi_eigen(b, n, vecs);

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto eig = [&](int i) { return b[static_cast<size_t>(i) * n + i]; };
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return eig(x) > eig(y); });

  const double lam1 = std::max(eig(order[0]), 0.0);
  const double pos_tol = lam1 * 1e-9 + 1e-12;
  const double gap_tol = lam1 * 1e-6 + 1e-12;
  int positive = 0;
  while (positive < n && eig(order[static_cast<size_t>(positive)]) > pos_tol)
    ++positive;

  // Keep the largest k <= 3 eigenvalues, but never cut through a (near-)
  // degenerate block: symmetric molecules (rings, stars) have tied
  // eigenvalues, and an arbitrary basis inside a split block would make the
  // reconstructed distances depend on the input atom labeling. Dropping the
  // whole block keeps distances a pure spectral function of the graph.
  int k = std::min(positive, 3);
  while (k > 0) {
    const double next = k < n ? eig(order[static_cast<size_t>(k)]) : 0.0;
    if (eig(order[static_cast<size_t>(k - 1)]) - next > gap_tol) break;
    --k;
  }

  for (int d = 0; d < k; ++d) {
    const int col = order[static_cast<size_t>(d)];
    // Deterministic sign: the largest-magnitude entry (first one on ties)
    // is made positive.
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      const double m = std::fabs(vecs[static_cast<size_t>(i) * n + col]);
      if (m > best) {
        best = m;
        arg = i;
      }
    }
    const double sign = vecs[static_cast<size_t>(arg) * n + col] < 0.0 ? -1.0 : 1.0;
    const double scale = sign * std::sqrt(eig(col));
    for (int i = 0; i < n; ++i)
      out.coords[static_cast<size_t>(i)][static_cast<size_t>(d)] =
          vecs[static_cast<size_t>(i) * n + col] * scale;
  }
  return out;
}

Conformer canonical_conformer(const Conformer& mol) {
  const int n = static_cast<int>(mol.graph.atom_count());
  std::vector<int> new_of_old(static_cast<size_t>(n));
  if (mol.has_coords()) {
    if (static_cast<int>(mol.coords.size()) != n)
      fail(ErrorKind::LengthMismatch, "coords length != atom count");
    for (const auto& p : mol.coords)
      for (double x : p)
        if (!std::isfinite(x))
          fail(ErrorKind::NonFiniteValue, "non-finite atom coordinate");
    // Refinement ranks first; exact coordinates break symmetry ties (two
    // automorphic atoms are physically distinguished by where they sit).
    const auto ranks = refined_ranks(mol.graph);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      if (ranks[static_cast<size_t>(x)] != ranks[static_cast<size_t>(y)])
        return ranks[static_cast<size_t>(x)] < ranks[static_cast<size_t>(y)];
      if (mol.coords[static_cast<size_t>(x)] != mol.coords[static_cast<size_t>(y)])
        return mol.coords[static_cast<size_t>(x)] < mol.coords[static_cast<size_t>(y)];
      return x < y;
    });
    for (int pos = 0; pos < n; ++pos)
      new_of_old[static_cast<size_t>(order[static_cast<size_t>(pos)])] = pos;
    Conformer out;
    out.graph = relabel(mol.graph, new_of_old);
    out.coords.resize(static_cast<size_t>(n));
    for (int old = 0; old < n; ++old)
      out.coords[static_cast<size_t>(new_of_old[static_cast<size_t>(old)])] =
          mol.coords[static_cast<size_t>(old)];
    return out;
  }
  // No coordinates: the canonical-SMILES ranks give a relabeling-invariant
  // order, and fallback coordinates computed on the reordered graph are then
  // bitwise identical for any input labeling of the same molecule.
  new_of_old = canonicalize(mol.graph).ranks;
  return fallback_coords(relabel(mol.graph, new_of_old));
}

Reaction canonical_reaction(const Reaction& rxn) {
  auto canon_side = [](const std::vector<Conformer>& side) {
    struct Entry {
      Conformer conf;
      std::string smi;
      std::string coord_key;
      size_t pos;
    };
    std::vector<Entry> entries;
    entries.reserve(side.size());
    for (size_t i = 0; i < side.size(); ++i) {
      Entry e;
      e.conf = canonical_conformer(side[i]);
      e.smi = canonical_smiles(e.conf.graph);
      e.coord_key = flatten_coords_key(e.conf.coords);
      e.pos = i;
      entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.smi != b.smi) return a.smi < b.smi;
      if (a.coord_key != b.coord_key) return a.coord_key < b.coord_key;
      return a.pos < b.pos;
    });
    std::vector<Conformer> out;
    out.reserve(entries.size());
    for (auto& e : entries) out.push_back(std::move(e.conf));
    return out;
  };
  Reaction out;
  out.id = rxn.id;
  out.reactants = canon_side(rxn.reactants);
  out.products = canon_side(rxn.products);
  return out;
}

DatasetSplit split_random(const std::vector<LabeledReaction>& data,
                          double test_fraction, std::uint64_t seed) {
  if (data.empty()) fail(ErrorKind::EmptyDataset, "split_random: empty dataset");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    fail(ErrorKind::InvalidArgument, "test_fraction must be in (0, 1)");
  const size_t n = data.size();
  const size_t train_n = static_cast<size_t>(
      std::floor(static_cast<double>(n) * (1.0 - test_fraction)));
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  std::vector<char> in_train(n, 0);
  for (size_t i = 0; i < train_n; ++i) in_train[perm[i]] = 1;
  DatasetSplit split;
  split.kind = SplitKind::Random;
  for (size_t i = 0; i < n; ++i)
    (in_train[i] ? split.train : split.test).push_back(data[i]);
  return split;
}

DatasetSplit split_by_pivot(const std::vector<LabeledReaction>& data,
                            const std::vector<std::string>& pivot_smiles) {
  if (pivot_smiles.empty())
    fail(ErrorKind::InvalidArgument, "pivot set is empty");
  std::set<std::string> pivots;
  for (const auto& p : pivot_smiles)
    for (const auto& frag : parse_smiles(p))
      pivots.insert(canonical_smiles(frag));

  DatasetSplit split;
  split.kind = SplitKind::OutOfSample;
  for (const auto& lr : data) {
    bool hit = false;
    auto scan = [&](const std::vector<Conformer>& side) {
      for (const auto& c : side)
        if (!hit && pivots.count(canonical_smiles(c.graph))) hit = true;
    };
    scan(lr.reaction.reactants);
    scan(lr.reaction.products);
    (hit ? split.test : split.train).push_back(lr);
  }
  if (split.train.empty() || split.test.empty())
    fail(ErrorKind::DegenerateSplit,
         "pivot split left an empty train or test side");
  return split;
}

}  // namespace rxnshingle
