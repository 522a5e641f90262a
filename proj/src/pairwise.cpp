#include "rxnshingle/pairwise.hpp"

#include <algorithm>
#include <cmath>

#include "rxnshingle/error.hpp"
#include "rxnshingle/fingerprint.hpp"

namespace rxnshingle {
namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;

const Conformer& shingle_molecule(const Shingle& s, const Reaction& rxn) {
  const auto& side = s.side == Side::Reactant ? rxn.reactants : rxn.products;
  if (s.mol_index < 0 || s.mol_index >= static_cast<int>(side.size()))
    fail(ErrorKind::IndexOutOfRange, "shingle molecule index out of range");
  return side[static_cast<size_t>(s.mol_index)];
}

}  // namespace

GkptParams init_gkpt_grid(int K, int heads, double lo, double hi) {
  if (K < 1 || heads < 1)
    fail(ErrorKind::InvalidArgument, "K and heads must be positive");
  GkptParams p;
  p.K = K;
  p.heads = heads;
  p.e1.assign(static_cast<size_t>(kNumPairTypes) * K, 1.0);
  p.e2.assign(static_cast<size_t>(kNumPairTypes) * K, 0.0);
  p.mu.resize(static_cast<size_t>(K));
  const double spacing = K > 1 ? (hi - lo) / (K - 1) : (hi - lo);
  for (int k = 0; k < K; ++k) p.mu[static_cast<size_t>(k)] = lo + spacing * k;
  p.sigma.assign(static_cast<size_t>(K), std::max(spacing, kSigmaFloor));
  p.w.assign(static_cast<size_t>(K) * heads, 0.0);
  return p;
}

PairFeatures pair_features(const ShingleSet& shingles, const Reaction& rxn) {
  PairFeatures pf;
  if (shingles.empty()) {
    // Null-token case: one placeholder shingle connected to itself.
    pf.n = 1;
    pf.d_g = {0.0};
    pf.d_e = {1.0};
    pf.d_s = {0.0};
    return pf;
  }
  const int n = static_cast<int>(shingles.shingles.size());
  pf.n = n;
  pf.d_g.assign(static_cast<size_t>(n) * n, 0.0);
  pf.d_e.assign(static_cast<size_t>(n) * n, 0.0);
  pf.d_s.assign(static_cast<size_t>(n) * n, 0.0);

  // Coordinates per molecule: use what the reaction carries, else synthesize.
  // The canonical pipeline always supplies coordinates, so the fallback here
  // only triggers for direct API use.
  std::vector<Vec3> centroids(static_cast<size_t>(n));
  std::vector<std::vector<Vec3>> coords_cache[2];
  coords_cache[0].resize(rxn.reactants.size());
  coords_cache[1].resize(rxn.products.size());
  auto mol_coords = [&](const Shingle& s) -> const std::vector<Vec3>& {
    const auto& mol = shingle_molecule(s, rxn);
    auto& slot = coords_cache[s.side == Side::Reactant ? 0 : 1]
                             [static_cast<size_t>(s.mol_index)];
    if (slot.empty())
      slot = mol.has_coords() ? mol.coords : fallback_coords(mol.graph).coords;
    return slot;
  };

  std::vector<BitFingerprint> fps;
  fps.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& s = shingles.shingles[static_cast<size_t>(i)];
    const auto& coords = mol_coords(s);
    Vec3 c{0.0, 0.0, 0.0};
    for (int a : s.atom_indices) {
      if (a < 0 || a >= static_cast<int>(coords.size()))
        fail(ErrorKind::IndexOutOfRange, "shingle atom index out of range");
      for (int k = 0; k < 3; ++k)
        c[static_cast<size_t>(k)] += coords[static_cast<size_t>(a)][static_cast<size_t>(k)];
    }
    for (int k = 0; k < 3; ++k)
      c[static_cast<size_t>(k)] /= static_cast<double>(s.atom_indices.size());
    centroids[static_cast<size_t>(i)] = c;
    const auto& mol = shingle_molecule(s, rxn);
    fps.push_back(morgan_fingerprint(
        induced_subgraph(mol.graph, s.atom_indices), 2, 2048));
  }

  for (int i = 0; i < n; ++i) {
    const auto& si = shingles.shingles[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const auto& sj = shingles.shingles[static_cast<size_t>(j)];
      const size_t at = static_cast<size_t>(i) * n + j;
      const bool same_mol = si.side == sj.side && si.mol_index == sj.mol_index;
      pf.d_e[at] = same_mol ? 1.0 : 0.0;
      if (same_mol) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double d = centroids[static_cast<size_t>(i)][static_cast<size_t>(k)] -
                           centroids[static_cast<size_t>(j)][static_cast<size_t>(k)];
          sum += d * d;
        }
        pf.d_g[at] = std::sqrt(sum);
      }
      pf.d_s[at] = i == j ? 0.0
                          : 1.0 - tanimoto(fps[static_cast<size_t>(i)],
                                           fps[static_cast<size_t>(j)]);
    }
  }
  return pf;
}

std::vector<double> gkpt(double x, int e, const GkptParams& params) {
  if (e < 0 || e >= kNumPairTypes)
    fail(ErrorKind::IndexOutOfRange, "pair type out of range");
  std::vector<double> out(static_cast<size_t>(params.K));
  for (int k = 0; k < params.K; ++k) {
    const double xp = params.e1[static_cast<size_t>(e) * params.K + k] * x +
                      params.e2[static_cast<size_t>(e) * params.K + k];
    const double sig = std::max(params.sigma[static_cast<size_t>(k)], kSigmaFloor);
    const double z = (xp - params.mu[static_cast<size_t>(k)]) / sig;
    out[static_cast<size_t>(k)] = std::exp(-0.5 * z * z) / (sig * kSqrt2Pi);
  }
  return out;
}

std::vector<double> initial_bias(const PairFeatures& pf,
                                 const GkptParams& params_g,
                                 const GkptParams& params_s, int heads) {
  if (params_g.heads != heads || params_s.heads != heads)
    fail(ErrorKind::ShapeMismatch, "GKPT head count mismatch");
  const int n = pf.n;
  std::vector<double> p0(static_cast<size_t>(heads) * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const size_t at = static_cast<size_t>(i) * n + j;
      const int e = pf.d_e[at] != 0.0 ? 1 : 0;
      const auto kg = gkpt(pf.d_g[at], e, params_g);
      const auto ks = gkpt(pf.d_s[at], e, params_s);
      for (int h = 0; h < heads; ++h) {
        double acc = 0.0;
        for (int k = 0; k < params_g.K; ++k)
          acc += kg[static_cast<size_t>(k)] *
                 params_g.w[static_cast<size_t>(k) * heads + h];
        for (int k = 0; k < params_s.K; ++k)
          acc += ks[static_cast<size_t>(k)] *
                 params_s.w[static_cast<size_t>(k) * heads + h];
        p0[(static_cast<size_t>(h) * n + i) * n + j] = acc;
      }
    }
  return p0;
}

}  // namespace rxnshingle
