#include "rxnshingle/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "rxnshingle/error.hpp"

namespace rxnshingle {

namespace {

const std::set<std::string>& periodic_table() {
  static const std::set<std::string> table = {
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
      "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
      "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
      "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
      "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
      "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
      "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
      "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
      "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
      "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};
  return table;
}

bool is_aromatic_symbol(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

bool organic_subset(const std::string& el) {
  static const std::set<std::string> subset = {"B",  "C",  "N", "O", "P",
                                               "S",  "F",  "Cl", "Br", "I"};
  return subset.count(el) > 0;
}

struct Parser {
  const std::string& text;
  std::vector<std::string>* warnings;
  size_t i = 0;

  std::vector<MolGraph> fragments{};
  MolGraph cur{};
  int prev = -1;
  std::vector<int> branch_stack{};
  char pending_bond = 0;  // 0 = unspecified
  struct OpenRing {
    int atom;
    char bond;
  };
  std::map<int, OpenRing> open_rings{};

  void warn(const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  }

  [[noreturn]] void error(ErrorKind kind, const std::string& msg) {
    fail(kind, msg + " at position " + std::to_string(i) + " in \"" + text + "\"");
  }

  bool done() const { return i >= text.size(); }
  char peek() const { return i < text.size() ? text[i] : '\0'; }

  BondOrder resolve_bond(char symbol, int a, int b) {
    switch (symbol) {
      case 0:
        return (cur.atom(a).aromatic && cur.atom(b).aromatic) ? BondOrder::Aromatic
                                                              : BondOrder::Single;
      case '-': return BondOrder::Single;
      case '=': return BondOrder::Double;
      case '#': return BondOrder::Triple;
      case ':': return BondOrder::Aromatic;
      default: error(ErrorKind::ParseError, "bad bond symbol");
    }
  }

  void attach_atom(AtomSpec atom) {
    const int idx = cur.add_atom(std::move(atom));
    if (prev >= 0) {
      cur.add_bond(prev, idx, resolve_bond(pending_bond, prev, idx));
    } else if (pending_bond != 0) {
      error(ErrorKind::ParseError, "bond with no preceding atom");
    }
    pending_bond = 0;
    prev = idx;
  }

  void ring_bond(int number) {
    if (prev < 0) error(ErrorKind::UnmatchedRingBond, "ring closure before any atom");
    auto it = open_rings.find(number);
    if (it == open_rings.end()) {
      open_rings[number] = {prev, pending_bond};
      pending_bond = 0;
      return;
    }
    const OpenRing open = it->second;
    open_rings.erase(it);
    char symbol = pending_bond;
    pending_bond = 0;
    if (open.bond != 0 && symbol != 0 && open.bond != symbol)
      error(ErrorKind::UnmatchedRingBond, "ring closure bond order mismatch");
    if (symbol == 0) symbol = open.bond;
    if (open.atom == prev)
      error(ErrorKind::UnmatchedRingBond, "ring closure to the same atom");
    if (cur.bond_between(open.atom, prev) >= 0)
      error(ErrorKind::UnmatchedRingBond, "duplicate ring closure bond");
    cur.add_bond(open.atom, prev, resolve_bond(symbol, open.atom, prev));
  }

  void end_fragment() {
    if (!branch_stack.empty()) error(ErrorKind::UnbalancedParen, "unclosed branch");
    if (!open_rings.empty())
      error(ErrorKind::UnmatchedRingBond,
            "dangling ring closure " + std::to_string(open_rings.begin()->first));
    if (pending_bond != 0) error(ErrorKind::ParseError, "dangling bond");
    if (cur.atom_count() == 0) error(ErrorKind::ParseError, "empty fragment");
    fragments.push_back(std::move(cur));
    cur = MolGraph();
    prev = -1;
  }

  int read_digits() {
    int value = 0;
    bool any = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (text[i] - '0');
      ++i;
      any = true;
    }
    return any ? value : -1;
  }

  AtomSpec parse_bracket_atom() {
    ++i;  // consume '['
    AtomSpec atom;
    const int isotope = read_digits();
    if (isotope >= 0) atom.isotope = isotope;
    // Element symbol: uppercase (+ optional lowercase) or aromatic lowercase.
    if (std::isupper(static_cast<unsigned char>(peek()))) {
      std::string symbol(1, text[i]);
      ++i;
      // A bracket holds one atom, so a valid two-letter symbol always wins.
      if (std::islower(static_cast<unsigned char>(peek())) &&
          periodic_table().count(symbol + peek())) {
        symbol += text[i];
        ++i;
      }
      if (!periodic_table().count(symbol))
        error(ErrorKind::UnknownElement, "unknown element '" + symbol + "'");
      atom.element = symbol;
    } else if (std::islower(static_cast<unsigned char>(peek()))) {
      if (!is_aromatic_symbol(peek()))
        error(ErrorKind::UnknownElement,
              std::string("unknown aromatic element '") + peek() + "'");
      atom.element = std::string(1, std::toupper(static_cast<unsigned char>(peek())));
      atom.aromatic = true;
      ++i;
    } else {
      error(ErrorKind::UnknownElement, "missing element symbol in bracket");
    }
    if (peek() == '@') {
      ++i;
      if (peek() == '@') ++i;
      warn("stereo descriptor dropped in bracket atom");
    }
    if (peek() == 'H') {
      ++i;
      const int count = read_digits();
      atom.explicit_h = count >= 0 ? count : 1;
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = text[i];
      int magnitude = 1;
      ++i;
      const int digits = read_digits();
      if (digits >= 0) {
        magnitude = digits;
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++i;
        }
      }
      atom.charge = sign == '+' ? magnitude : -magnitude;
    }
    if (peek() == ':') {
      ++i;
      if (read_digits() < 0) error(ErrorKind::ParseError, "bad atom class");
      warn("atom class dropped");
    }
    if (peek() != ']') error(ErrorKind::ParseError, "expected ']'");
    ++i;
    return atom;
  }

  void run() {
    while (!done()) {
      const char c = text[i];
      if (c == '[') {
        attach_atom(parse_bracket_atom());
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        std::string symbol(1, c);
        ++i;
        if ((c == 'C' && peek() == 'l') || (c == 'B' && peek() == 'r')) {
          symbol += text[i];
          ++i;
        }
        if (!organic_subset(symbol))
          error(ErrorKind::UnknownElement,
                "element '" + symbol + "' needs brackets or is unknown");
        AtomSpec atom;
        atom.element = symbol;
        attach_atom(std::move(atom));
      } else if (std::islower(static_cast<unsigned char>(c))) {
        if (!is_aromatic_symbol(c))
          error(ErrorKind::UnknownElement,
                std::string("unknown aromatic element '") + c + "'");
        AtomSpec atom;
        atom.element = std::string(1, std::toupper(static_cast<unsigned char>(c)));
        atom.aromatic = true;
        ++i;
        attach_atom(std::move(atom));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        ++i;
        ring_bond(c - '0');
      } else if (c == '%') {
        ++i;
        if (!std::isdigit(static_cast<unsigned char>(peek())))
          error(ErrorKind::UnmatchedRingBond, "bad %nn ring closure");
        int number = text[i] - '0';
        ++i;
        if (!std::isdigit(static_cast<unsigned char>(peek())))
          error(ErrorKind::UnmatchedRingBond, "bad %nn ring closure");
        number = number * 10 + (text[i] - '0');
        ++i;
        ring_bond(number);
      } else if (c == '-' || c == '=' || c == '#' || c == ':') {
        if (pending_bond != 0) error(ErrorKind::ParseError, "double bond symbol");
        pending_bond = c;
        ++i;
      } else if (c == '/' || c == '\\') {
        if (pending_bond != 0) error(ErrorKind::ParseError, "double bond symbol");
        warn("stereo bond dropped, treated as single");
        pending_bond = '-';
        ++i;
      } else if (c == '(') {
        if (prev < 0) error(ErrorKind::UnbalancedParen, "branch with no atom");
        branch_stack.push_back(prev);
        ++i;
      } else if (c == ')') {
        if (branch_stack.empty()) error(ErrorKind::UnbalancedParen, "unmatched ')'");
        if (pending_bond != 0) error(ErrorKind::ParseError, "dangling bond");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++i;
      } else if (c == '.') {
        if (!branch_stack.empty())
          error(ErrorKind::UnbalancedParen, "fragment dot inside branch");
        end_fragment();
        ++i;
      } else {
        error(ErrorKind::ParseError, std::string("unexpected character '") + c + "'");
      }
    }
    end_fragment();
  }
};

}  // namespace

std::vector<MolGraph> parse_smiles(const std::string& text,
                                   std::vector<std::string>* warnings) {
  size_t begin = text.find_first_not_of(" \t\r\n");
  size_t end = text.find_last_not_of(" \t\r\n");
  if (begin == std::string::npos) fail(ErrorKind::EmptyInput, "empty SMILES input");
  const std::string trimmed = text.substr(begin, end - begin + 1);
  Parser parser{trimmed, warnings};
  parser.run();
  return std::move(parser.fragments);
}

ReactionGraphs parse_reaction_smiles(const std::string& text,
                                     std::vector<std::string>* warnings) {
  size_t first = text.find('>');
  if (first == std::string::npos)
    fail(ErrorKind::MissingArrow, "reaction SMILES needs '>' separators: " + text);
  size_t second = text.find('>', first + 1);
  if (second == std::string::npos || text.find('>', second + 1) != std::string::npos)
    fail(ErrorKind::MissingArrow, "malformed reaction arrow in: " + text);

  const std::string reactant_part = text.substr(0, first);
  const std::string agent_part = text.substr(first + 1, second - first - 1);
  const std::string product_part = text.substr(second + 1);

  ReactionGraphs rxn;
  if (reactant_part.find_first_not_of(" \t\r\n") == std::string::npos)
    fail(ErrorKind::EmptyReactantSide, "reaction has no reactants: " + text);
  rxn.reactants = parse_smiles(reactant_part, warnings);
  if (agent_part.find_first_not_of(" \t\r\n") != std::string::npos) {
    auto agents = parse_smiles(agent_part, warnings);
    for (auto& mol : agents) rxn.reactants.push_back(std::move(mol));
  }
  if (product_part.find_first_not_of(" \t\r\n") == std::string::npos)
    fail(ErrorKind::EmptyProductSide, "reaction has no products: " + text);
  rxn.products = parse_smiles(product_part, warnings);
  return rxn;
}

// ---------------------------------------------------------------------------
// Writing

namespace {

bool bare_atom_ok(const AtomSpec& a) {
  if (a.charge != 0 || a.isotope != 0 || a.explicit_h != 0) return false;
  if (!organic_subset(a.element)) return false;
  if (a.aromatic && a.element.size() > 1) return false;  // no aromatic Cl/Br/...
  return true;
}

std::string atom_token(const AtomSpec& a) {
  std::string symbol = a.element;
  if (a.aromatic)
    for (auto& c : symbol) c = static_cast<char>(std::tolower(c));
  if (bare_atom_ok(a)) return symbol;
  std::string out = "[";
  if (a.isotope != 0) out += std::to_string(a.isotope);
  out += symbol;
  if (a.explicit_h > 0) {
    out += 'H';
    if (a.explicit_h > 1) out += std::to_string(a.explicit_h);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1) out += std::to_string(std::abs(a.charge));
  }
  out += ']';
  return out;
}

// '\0' for an implicit bond; aromatic is always written out and singles
// between two aromatic atoms are forced explicit so they re-parse as single.
char bond_symbol(const MolGraph& mol, const BondSpec& b) {
  switch (b.order) {
    case BondOrder::Single:
      return (mol.atom(b.a).aromatic && mol.atom(b.b).aromatic) ? '-' : '\0';
    case BondOrder::Double: return '=';
    case BondOrder::Triple: return '#';
    case BondOrder::Aromatic: return ':';
  }
  return '\0';
}

// DFS SMILES emission over one connected component containing `start`.
// Neighbors are visited in ascending priority order.
std::string emit_component(const MolGraph& mol, const std::vector<int>& priority,
                           int start) {
  const int n = mol.atom_count();
  auto sorted_neighbors = [&](int v) {
    auto nbrs = mol.neighbors(v);
    std::sort(nbrs.begin(), nbrs.end(), [&](const auto& x, const auto& y) {
      return priority[x.first] < priority[y.first];
    });
    return nbrs;
  };

  // Pass 1: DFS tree (children per atom in visit order) and ring-closure bonds.
  std::vector<char> seen(n, 0);
  std::vector<char> is_ring_bond(mol.bond_count(), 0);
  std::vector<std::vector<std::pair<int, int>>> children(n);  // (atom, bond)
  {
    struct Frame {
      int v;
      std::vector<std::pair<int, int>> nbrs;
      size_t next = 0;
      int parent_bond;
    };
    std::vector<Frame> frames;
    frames.push_back({start, sorted_neighbors(start), 0, -1});
    seen[start] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next >= f.nbrs.size()) {
        frames.pop_back();
        continue;
      }
      const auto [u, bidx] = f.nbrs[f.next++];
      if (bidx == f.parent_bond || is_ring_bond[bidx]) continue;
      if (seen[u]) {
        is_ring_bond[bidx] = 1;
        continue;
      }
      seen[u] = 1;
      children[f.v].emplace_back(u, bidx);
      frames.push_back({u, sorted_neighbors(u), 0, bidx});
    }
  }

  // Pass 2: emit. Ring digits allocated smallest-free on open.
  std::string out;
  std::map<int, int> open_digit_by_bond;  // bond idx -> digit
  std::set<int> digits_in_use;
  auto ring_token = [&](int bidx) {
    std::string tok;
    if (const char sym = bond_symbol(mol, mol.bond(bidx))) tok += sym;
    auto it = open_digit_by_bond.find(bidx);
    int digit;
    if (it == open_digit_by_bond.end()) {
      digit = 1;
      while (digits_in_use.count(digit)) ++digit;
      digits_in_use.insert(digit);
      open_digit_by_bond[bidx] = digit;
    } else {
      digit = it->second;
      digits_in_use.erase(digit);
      open_digit_by_bond.erase(it);
    }
    if (digit >= 10) tok += '%';
    tok += std::to_string(digit);
    return tok;
  };

  auto emit_atom = [&](int v) {
    out += atom_token(mol.atom(v));
    for (const auto& [u, bidx] : sorted_neighbors(v)) {
      (void)u;
      if (is_ring_bond[bidx]) out += ring_token(bidx);
    }
  };

  struct EmitFrame {
    int v;
    size_t next_child = 0;
  };
  std::vector<EmitFrame> estack;
  emit_atom(start);
  estack.push_back({start});
  while (!estack.empty()) {
    EmitFrame& f = estack.back();
    if (f.next_child >= children[f.v].size()) {
      estack.pop_back();
      if (!estack.empty()) {
        EmitFrame& parent = estack.back();
        if (parent.next_child < children[parent.v].size()) out += ')';
      }
      continue;
    }
    const bool needs_paren = children[f.v].size() - f.next_child > 1;
    const auto [u, bidx] = children[f.v][f.next_child++];
    if (needs_paren) out += '(';
    if (const char sym = bond_symbol(mol, mol.bond(bidx))) out += sym;
    emit_atom(u);
    estack.push_back({u});
  }
  return out;
}

std::vector<std::vector<int>> connected_components(const MolGraph& mol) {
  std::vector<std::vector<int>> comps;
  std::vector<char> seen(mol.atom_count(), 0);
  for (int i = 0; i < mol.atom_count(); ++i) {
    if (seen[i]) continue;
    const auto dist = bfs_distances(mol, i);
    std::vector<int> comp;
    for (int j = 0; j < mol.atom_count(); ++j)
      if (dist[j] >= 0 && !seen[j]) {
        seen[j] = 1;
        comp.push_back(j);
      }
    comps.push_back(std::move(comp));
  }
  return comps;
}

std::string emit_all(const MolGraph& mol, const std::vector<int>& priority) {
  const auto comps = connected_components(mol);
  // Components ordered by their highest-priority atom.
  std::vector<std::pair<int, int>> order;  // (best priority, comp index)
  for (size_t c = 0; c < comps.size(); ++c) {
    int best = std::numeric_limits<int>::max();
    for (int a : comps[c]) best = std::min(best, priority[a]);
    order.emplace_back(best, static_cast<int>(c));
  }
  std::sort(order.begin(), order.end());
  std::string out;
  for (size_t k = 0; k < order.size(); ++k) {
    const auto& comp = comps[order[k].second];
    int start = comp[0];
    for (int a : comp)
      if (priority[a] < priority[start]) start = a;
    if (k) out += '.';
    out += emit_component(mol, priority, start);
  }
  return out;
}

}  // namespace

std::string write_smiles(const MolGraph& mol) {
  std::vector<int> prio(mol.atom_count());
  std::iota(prio.begin(), prio.end(), 0);
  return emit_all(mol, prio);
}

std::string random_smiles(const MolGraph& mol, Rng& rng) {
  return emit_all(mol, rng.permutation(mol.atom_count()));
}

// ---------------------------------------------------------------------------
// Canonicalization: Morgan-style iterative refinement, then exhaustive
// tie-breaking; the lexicographically smallest emission wins.

namespace {

struct AtomKey {
  std::string element;
  int aromatic;
  int charge;
  int explicit_h;
  int isotope;
  int degree;
  int ring;
  auto operator<=>(const AtomKey&) const = default;
};

template <typename Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  std::vector<int> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });
  std::vector<int> ranks(keys.size());
  int rank = 0;
  for (size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && keys[idx[k - 1]] < keys[idx[k]]) ++rank;
    ranks[idx[k]] = rank;
  }
  return ranks;
}

int class_count(const std::vector<int>& ranks) {
  return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()) + 1;
}

// Neighbor-rank refinement to a fixed point.
std::vector<int> refine(const MolGraph& mol, std::vector<int> ranks) {
  int classes = class_count(ranks);
  while (classes < mol.atom_count()) {
    std::vector<std::pair<int, std::vector<int>>> keys(mol.atom_count());
    for (int v = 0; v < mol.atom_count(); ++v) {
      std::vector<int> nbr;
      for (const auto& [u, bidx] : mol.neighbors(v)) {
        // Bond order distinguishes otherwise-equal neighbors.
        nbr.push_back(ranks[u] * 8 + static_cast<int>(mol.bond(bidx).order));
      }
      std::sort(nbr.begin(), nbr.end());
      keys[v] = {ranks[v], std::move(nbr)};
    }
    auto next = dense_ranks(keys);
    const int next_classes = class_count(next);
    ranks = std::move(next);
    if (next_classes == classes) break;
    classes = next_classes;
  }
  return ranks;
}

std::vector<int> initial_ranks(const MolGraph& mol) {
  const auto in_ring = ring_membership(mol);
  std::vector<AtomKey> keys(mol.atom_count());
  for (int v = 0; v < mol.atom_count(); ++v) {
    const auto& a = mol.atom(v);
    keys[v] = {a.element, a.aromatic, a.charge, a.explicit_h,
               a.isotope, mol.degree(v), in_ring[v]};
  }
  return dense_ranks(keys);
}

struct CanonSearch {
  const MolGraph& mol;
  std::string best{};
  std::vector<int> best_ranks{};
  // Bound on explored labelings; only pathological symmetry gets near it.
  int budget = 20000;

  void explore(std::vector<int> ranks) {
    if (budget <= 0) return;
    ranks = refine(mol, ranks);
    // First (lowest-rank) class with a tie.
    int tie_rank = -1;
    std::vector<int> counts(mol.atom_count(), 0);
    for (int r : ranks) ++counts[r];
    for (int r = 0; r < mol.atom_count(); ++r) {
      if (counts[r] > 1) {
        tie_rank = r;
        break;
      }
    }
    if (tie_rank < 0) {
      --budget;
      int start = 0;
      for (int v = 0; v < mol.atom_count(); ++v)
        if (ranks[v] < ranks[start]) start = v;
      std::string s = emit_component(mol, ranks, start);
      if (best.empty() || s < best) {
        best = std::move(s);
        best_ranks = std::move(ranks);
      }
      return;
    }
    for (int v = 0; v < mol.atom_count() && budget > 0; ++v) {
      if (ranks[v] != tie_rank) continue;
      std::vector<int> bumped(mol.atom_count());
      for (int u = 0; u < mol.atom_count(); ++u) bumped[u] = ranks[u] * 2;
      bumped[v] -= 1;
      explore(dense_ranks(bumped));
    }
  }
};

}  // namespace

int element_index(const std::string& symbol) {
  const auto& table = periodic_table();
  const auto it = table.find(symbol);
  if (it == table.end()) return -1;
  return static_cast<int>(std::distance(table.begin(), it));
}

int element_count() { return static_cast<int>(periodic_table().size()); }

std::vector<int> refined_ranks(const MolGraph& mol) {
  return refine(mol, initial_ranks(mol));
}

CanonicalResult canonicalize(const MolGraph& mol) {
  if (mol.atom_count() == 0) fail(ErrorKind::EmptyInput, "empty molecule");
  const auto comps = connected_components(mol);
  if (comps.size() == 1) {
    CanonSearch search{mol};
    search.explore(initial_ranks(mol));
    return {std::move(search.best), std::move(search.best_ranks)};
  }
  // Disconnected graphs: canonicalize per component, then order components by
  // their canonical string.
  struct Part {
    std::string smiles;
    std::vector<int> atoms;      // component atoms in the full graph
    std::vector<int> local_ranks;
    size_t input_pos;
  };
  std::vector<Part> parts;
  for (size_t c = 0; c < comps.size(); ++c) {
    const MolGraph sub = induced_subgraph(mol, comps[c]);
    CanonSearch search{sub};
    search.explore(initial_ranks(sub));
    parts.push_back({std::move(search.best), comps[c],
                     std::move(search.best_ranks), c});
  }
  std::sort(parts.begin(), parts.end(), [](const Part& a, const Part& b) {
    return a.smiles != b.smiles ? a.smiles < b.smiles : a.input_pos < b.input_pos;
  });
  CanonicalResult result;
  result.ranks.assign(mol.atom_count(), 0);
  int offset = 0;
  for (size_t k = 0; k < parts.size(); ++k) {
    if (k) result.smiles += '.';
    result.smiles += parts[k].smiles;
    for (size_t j = 0; j < parts[k].atoms.size(); ++j)
      result.ranks[parts[k].atoms[j]] = offset + parts[k].local_ranks[j];
    offset += static_cast<int>(parts[k].atoms.size());
  }
  return result;
}

std::string canonical_smiles(const MolGraph& mol) { return canonicalize(mol).smiles; }

}  // namespace rxnshingle
