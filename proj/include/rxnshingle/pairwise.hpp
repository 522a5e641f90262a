#pragma once

#include <vector>

#include "rxnshingle/mol.hpp"
#include "rxnshingle/shingles.hpp"

namespace rxnshingle {

// The three N_s x N_s pair matrices, row-major. An empty ShingleSet maps to
// the 1x1 null-token case (d_e = 1, distances 0).
struct PairFeatures {
  int n = 0;
  std::vector<double> d_g;  // centroid distance, same molecule only, else 0
  std::vector<double> d_e;  // 1 iff same (side, molecule); diagonal 1
  std::vector<double> d_s;  // 1 - Tanimoto of shingle Morgan fingerprints
};

// Gaussian kernel bank with pair types. The pair-type index is the binary
// connectivity value: e = 0 cross-molecule, e = 1 same-molecule.
struct GkptParams {
  int K = 0;
  int heads = 0;
  std::vector<double> e1;     // N_e x K, row-major (N_e = 2)
  std::vector<double> e2;     // N_e x K
  std::vector<double> mu;     // K
  std::vector<double> sigma;  // K, floored at 1e-6 when evaluated
  std::vector<double> w;      // K x heads projection to per-head bias
};

inline constexpr int kNumPairTypes = 2;
inline constexpr double kSigmaFloor = 1e-6;

// mu on an even grid over [lo, hi], sigma = grid spacing, e1 = 1, e2 = 0,
// w = 0 (the model init overwrites w with small random values).
GkptParams init_gkpt_grid(int K, int heads, double lo, double hi);

PairFeatures pair_features(const ShingleSet& shingles, const Reaction& rxn);

// K kernel responses for scalar input x under pair type e.
std::vector<double> gkpt(double x, int e, const GkptParams& params);

// P0[h][i][j] = gkpt_g(d_g, e) . w_g[:,h] + gkpt_s(d_s, e) . w_s[:,h],
// returned as heads x n x n row-major.
std::vector<double> initial_bias(const PairFeatures& pf,
                                 const GkptParams& params_g,
                                 const GkptParams& params_s, int heads);

}  // namespace rxnshingle
