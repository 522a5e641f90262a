#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rxnshingle/mol.hpp"

namespace rxnshingle {

struct BitFingerprint {
  std::vector<std::uint64_t> words;
  int length = 0;  // bits

  explicit BitFingerprint(int nbits = 0)
      : words(static_cast<size_t>((nbits + 63) / 64), 0), length(nbits) {}

  bool test(int bit) const {
    return (words[static_cast<size_t>(bit >> 6)] >> (bit & 63)) & 1u;
  }
  void set(int bit) { words[static_cast<size_t>(bit >> 6)] |= 1ull << (bit & 63); }
  int popcount() const;
};

// Seedless FNV-1a; the fixed hash keeps fingerprints bit-exact across
// platforms and runs.
std::uint64_t fnv1a64(std::string_view text);

// Circular fingerprint: canonical SMILES of every radius-0..radius atom
// neighborhood, hashed and folded mod nbits (power of two).
BitFingerprint morgan_fingerprint(const MolGraph& mol, int radius, int nbits);

// |a AND b| / |a OR b|; two all-zero fingerprints compare as 1.0.
double tanimoto(const BitFingerprint& a, const BitFingerprint& b);

// Differential reaction fingerprint: folds the uncapped symmetric-difference
// key set. Identical sides give the all-zero vector.
BitFingerprint drfp(const Reaction& rxn, int r_max, int nbits = 1024);

// Lowercase hex, byte 0 first, bit 0 = LSB of the first byte.
std::string fingerprint_hex(const BitFingerprint& fp);
BitFingerprint fingerprint_from_hex(const std::string& hex);

}  // namespace rxnshingle
