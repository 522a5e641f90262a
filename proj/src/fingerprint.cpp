#include "rxnshingle/fingerprint.hpp"

#include <bit>

#include "rxnshingle/error.hpp"
#include "rxnshingle/shingles.hpp"
#include "rxnshingle/smiles.hpp"

namespace rxnshingle {

int BitFingerprint::popcount() const {
  int n = 0;
  for (std::uint64_t w : words) n += std::popcount(w);
  return n;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

BitFingerprint morgan_fingerprint(const MolGraph& mol, int radius, int nbits) {
  if (radius < 0) fail(ErrorKind::InvalidArgument, "radius must be >= 0");
  if (nbits <= 0 || (nbits & (nbits - 1)) != 0)
    fail(ErrorKind::InvalidArgument, "nbits must be a power of two");
  BitFingerprint fp(nbits);
  const int n = static_cast<int>(mol.atom_count());
  for (int v = 0; v < n; ++v)
    for (int r = 0; r <= radius; ++r) {
      const auto atoms = ball(mol, v, r);
      const std::string key = canonical_smiles(induced_subgraph(mol, atoms));
      fp.set(static_cast<int>(fnv1a64(key) & static_cast<std::uint64_t>(nbits - 1)));
    }
  return fp;
}

double tanimoto(const BitFingerprint& a, const BitFingerprint& b) {
  if (a.length != b.length)
    fail(ErrorKind::LengthMismatch, "fingerprint lengths differ");
  std::int64_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.words.size(); ++i) {
    inter += std::popcount(a.words[i] & b.words[i]);
    uni += std::popcount(a.words[i] | b.words[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BitFingerprint drfp(const Reaction& rxn, int r_max, int nbits) {
  if (nbits <= 0 || (nbits & (nbits - 1)) != 0)
    fail(ErrorKind::InvalidArgument, "nbits must be a power of two");
  BitFingerprint fp(nbits);
  for (const auto& key :
       symmetric_difference_keys(rxn.reactants, rxn.products, r_max))
    fp.set(static_cast<int>(fnv1a64(key) & static_cast<std::uint64_t>(nbits - 1)));
  return fp;
}

std::string fingerprint_hex(const BitFingerprint& fp) {
  static const char* digits = "0123456789abcdef";
  const int nbytes = (fp.length + 7) / 8;
  std::string out;
  out.reserve(static_cast<size_t>(nbytes) * 2);
  for (int i = 0; i < nbytes; ++i) {
    const unsigned byte =
        static_cast<unsigned>(fp.words[static_cast<size_t>(i >> 3)] >>
                              ((i & 7) * 8)) &
        0xffu;
    out += digits[byte >> 4];
    out += digits[byte & 0xf];
  }
  return out;
}

BitFingerprint fingerprint_from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0)
    fail(ErrorKind::ParseError, "hex fingerprint must have even length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    fail(ErrorKind::ParseError, "invalid hex digit in fingerprint");
  };
  const int nbytes = static_cast<int>(hex.size() / 2);
  BitFingerprint fp(nbytes * 8);
  for (int i = 0; i < nbytes; ++i) {
    const unsigned byte = static_cast<unsigned>(
        (nibble(hex[static_cast<size_t>(i) * 2]) << 4) |
        nibble(hex[static_cast<size_t>(i) * 2 + 1]));
    fp.words[static_cast<size_t>(i >> 3)] |= static_cast<std::uint64_t>(byte)
                                             << ((i & 7) * 8);
  }
  return fp;
}

}  // namespace rxnshingle
