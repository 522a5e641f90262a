// Acceptance suite. Each numbered criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails. Criteria with a
// stated runtime budget fail when they exceed it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "rxnshingle/error.hpp"
#include "rxnshingle/fingerprint.hpp"
#include "rxnshingle/model.hpp"
#include "rxnshingle/mol.hpp"
#include "rxnshingle/pairwise.hpp"
#include "rxnshingle/rng.hpp"
#include "rxnshingle/shingles.hpp"
#include "rxnshingle/smiles.hpp"
#include "rxnshingle/tensor.hpp"
#include "rxnshingle/train.hpp"

using namespace rxnshingle;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int idx, bool ok, const std::string& what) {
  std::printf("%s  criterion %2d: %s\n", ok ? "PASS" : "FAIL", idx, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---- reaction generators ----------------------------------------------

std::string random_chain(Rng& rng, int max_atoms) {
  static const char* atoms[] = {"C", "N", "O", "S"};
  int n = 1 + static_cast<int>(rng.uniform_int(max_atoms));
  std::string s;
  for (int i = 0; i < n; ++i) s += atoms[rng.uniform_int(4)];
  return s;
}

// Chain, or a 3..6-ring with an optional chain tail. Cycle rank stays <= 1,
// which the brute-force ring finder below relies on.
std::string random_small_molecule(Rng& rng, int max_atoms) {
  if (rng.uniform_int(10) < 3) {
    static const char* ring_atoms[] = {"C", "C", "N", "O"};
    int ring = 3 + static_cast<int>(rng.uniform_int(4));
    std::string s = std::string(ring_atoms[rng.uniform_int(4)]) + "1";
    for (int i = 1; i < ring; ++i) s += ring_atoms[rng.uniform_int(4)];
    s += "1";
    int tail = static_cast<int>(rng.uniform_int(std::max(1, max_atoms - ring + 1)));
    for (int i = 0; i < tail; ++i) s += "C";
    return s;
  }
  return random_chain(rng, max_atoms);
}

Reaction make_reaction(const std::string& text, std::string id = "") {
  ReactionGraphs g = parse_reaction_smiles(text);
  Reaction rxn;
  rxn.id = std::move(id);
  for (auto& m : g.reactants) rxn.reactants.push_back({std::move(m), {}});
  for (auto& m : g.products) rxn.products.push_back({std::move(m), {}});
  return rxn;
}

Reaction generate_reaction(Rng& rng, int max_mols, int max_atoms, int idx) {
  std::string text;
  int nr = 1 + static_cast<int>(rng.uniform_int(max_mols));
  for (int i = 0; i < nr; ++i) {
    if (i) text += '.';
    text += random_small_molecule(rng, max_atoms);
  }
  text += ">>";
  int np = 1 + static_cast<int>(rng.uniform_int(max_mols));
  for (int i = 0; i < np; ++i) {
    if (i) text += '.';
    text += random_small_molecule(rng, max_atoms);
  }
  return make_reaction(text, "r" + std::to_string(idx));
}

// ---- criteria 1 & 2: permutation harness --------------------------------

void criterion_permutation(const ModelParams& params) {
  auto t0 = Clock::now();
  Rng gen(2024);
  std::vector<Reaction> rxns;
  for (int i = 0; i < 100; ++i) rxns.push_back(generate_reaction(gen, 3, 6, i));

  PermutationReport rep = permutation_test(
      [&](const Reaction& r) { return predict_value(params, r); }, rxns, 10, 77);
  bool zero = rep.max_std == 0.0;
  for (double s : rep.stds) zero = zero && s == 0.0;
  const double dt = seconds_since(t0);
  report(1, zero && dt < 120.0,
         fmt("model prediction std exactly 0 over 100 reactions x 10 permutations "
             "(max std %.3g, %.1fs)", rep.max_std, dt));

  PermutationReport ref = permutation_test(order_sensitive_prediction, rxns, 10, 77);
  int nonzero = 0;
  for (double s : ref.stds)
    if (s > 0.0) ++nonzero;
  report(2, nonzero >= 95,
         fmt("order-sensitive reference predictor caught on %.0f%% of reactions",
             100.0 * nonzero / 100.0));
}

// ---- criterion 3: brute-force shingle oracle ----------------------------

std::vector<int> oracle_ball(const MolGraph& g, int center, int radius) {
  std::vector<int> dist(static_cast<size_t>(g.atom_count()), -1);
  std::vector<int> queue{center};
  dist[static_cast<size_t>(center)] = 0;
  for (size_t q = 0; q < queue.size(); ++q) {
    int v = queue[q];
    if (dist[static_cast<size_t>(v)] == radius) continue;
    for (auto [nb, bond] : g.neighbors(v))
      if (dist[static_cast<size_t>(nb)] < 0) {
        dist[static_cast<size_t>(nb)] = dist[static_cast<size_t>(v)] + 1;
        queue.push_back(nb);
      }
  }
  std::sort(queue.begin(), queue.end());
  return queue;
}

MolGraph oracle_subgraph(const MolGraph& g, const std::vector<int>& atoms) {
  MolGraph out;
  std::map<int, int> remap;
  for (int a : atoms) remap[a] = out.add_atom(g.atom(a));
  for (const auto& b : g.bonds()) {
    auto ia = remap.find(b.a), ib = remap.find(b.b);
    if (ia != remap.end() && ib != remap.end())
      out.add_bond(ia->second, ib->second, b.order);
  }
  return out;
}

// Unique cycle of a unicyclic graph: prune vertices of degree <= 1 until
// only the cycle remains.
std::vector<int> oracle_unique_cycle(const MolGraph& g) {
  const int n = g.atom_count();
  std::vector<int> deg(static_cast<size_t>(n));
  std::vector<char> alive(static_cast<size_t>(n), 1);
  for (int v = 0; v < n; ++v) deg[static_cast<size_t>(v)] = g.degree(v);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v)
      if (alive[static_cast<size_t>(v)] && deg[static_cast<size_t>(v)] <= 1) {
        alive[static_cast<size_t>(v)] = 0;
        changed = true;
        for (auto [nb, bond] : g.neighbors(v))
          if (alive[static_cast<size_t>(nb)]) --deg[static_cast<size_t>(nb)];
      }
  }
  std::vector<int> cycle;
  for (int v = 0; v < n; ++v)
    if (alive[static_cast<size_t>(v)]) cycle.push_back(v);
  return cycle;
}

struct OracleSet {
  std::multiset<std::string> keys;
  bool caps_would_bind = false;
  bool rank_ok = true;
};

OracleSet oracle_symdiff(const std::vector<Conformer>& reactants,
                         const std::vector<Conformer>& products, int r_max) {
  struct Inst {
    int side, mol;
    std::vector<int> atoms;
    std::string key;
  };
  std::vector<Inst> all;
  OracleSet out;
  auto collect = [&](const std::vector<Conformer>& mols, int side) {
    for (size_t m = 0; m < mols.size(); ++m) {
      const MolGraph& g = mols[m].graph;
      for (int v = 0; v < g.atom_count(); ++v)
        for (int r = 1; r <= r_max; ++r) {
          Inst inst{side, static_cast<int>(m), oracle_ball(g, v, r), {}};
          inst.key = canonical_smiles(oracle_subgraph(g, inst.atoms));
          all.push_back(std::move(inst));
        }
      const int rank = g.bond_count() - g.atom_count() + 1;  // connected mols
      if (rank > 1) out.rank_ok = false;
      if (rank == 1) {
        Inst inst{side, static_cast<int>(m), oracle_unique_cycle(g), {}};
        inst.key = canonical_smiles(oracle_subgraph(g, inst.atoms));
        all.push_back(std::move(inst));
      }
    }
  };
  collect(reactants, 0);
  collect(products, 1);

  std::set<std::string> rk, pk;
  for (const auto& inst : all) (inst.side == 0 ? rk : pk).insert(inst.key);

  std::set<std::tuple<int, int, std::vector<int>>> seen;
  std::map<std::string, int> per_key;
  std::map<std::pair<int, int>, int> per_mol;
  for (const auto& inst : all) {
    const auto& other = inst.side == 0 ? pk : rk;
    if (other.count(inst.key)) continue;
    if (!seen.insert({inst.side, inst.mol, inst.atoms}).second) continue;
    out.keys.insert(inst.key);
    if (++per_key[inst.key] > kPerKeyCap) out.caps_would_bind = true;
    if (++per_mol[{inst.side, inst.mol}] > kPerMoleculeCap) out.caps_would_bind = true;
  }
  if (static_cast<int>(out.keys.size()) > kReactionCap) out.caps_would_bind = true;
  return out;
}

void criterion_symdiff_oracle() {
  auto t0 = Clock::now();
  Rng gen(505);
  int checked = 0;
  bool ok = true;
  std::string why;
  for (int i = 0; i < 50 && ok; ++i) {
    Reaction rxn = generate_reaction(gen, 2, 12, i);
    for (int r_max = 1; r_max <= 3 && ok; ++r_max) {
      OracleSet oracle = oracle_symdiff(rxn.reactants, rxn.products, r_max);
      if (!oracle.rank_ok) {
        ok = false;
        why = "generator produced cycle rank > 1";
        break;
      }
      if (oracle.caps_would_bind) {
        ok = false;
        why = "corpus unexpectedly hit a cap";
        break;
      }
      ShingleSet got = symmetric_difference(rxn.reactants, rxn.products, r_max);
      std::multiset<std::string> got_keys;
      for (const auto& s : got.shingles) got_keys.insert(s.key);
      if (got_keys != oracle.keys) {
        ok = false;
        why = "key multiset mismatch on " + rxn.id + " r=" + std::to_string(r_max);
        break;
      }
      auto unique_keys = symmetric_difference_keys(rxn.reactants, rxn.products, r_max);
      std::set<std::string> oracle_unique(oracle.keys.begin(), oracle.keys.end());
      if (std::set<std::string>(unique_keys.begin(), unique_keys.end()) != oracle_unique) {
        ok = false;
        why = "unique key set mismatch on " + rxn.id;
        break;
      }
      ++checked;
    }
  }
  const double dt = seconds_since(t0);
  if (ok && dt >= 30.0) {
    ok = false;
    why = "over the 30s budget";
  }
  report(3, ok,
         ok ? fmt("symmetric difference matches brute force on %.0f reaction/radius "
                  "combinations (%.1fs)", checked, dt)
            : "symmetric difference oracle: " + why);
}

// ---- criterion 4: cap enforcement ---------------------------------------

void criterion_caps() {
  auto side = [](const std::string& s) {
    std::vector<Conformer> out;
    for (auto& m : parse_smiles(s)) out.push_back({std::move(m), {}});
    return out;
  };
  bool ok = true;

  // per-key: one repeated interior environment, far past 10 instances
  auto keyed = symmetric_difference(side(std::string(40, 'C')), side("O"), 1);
  int max_key = 0;
  for (const auto& [key, count] : keyed.per_key_counts) max_key = std::max(max_key, count);
  ok = ok && max_key == kPerKeyCap;

  // per-molecule: 120 distinct instances inside one molecule
  std::string mol;
  for (int i = 0; i < 4; ++i) mol += "CNOSCCNOOS";
  auto single = symmetric_difference(side(mol), side("P"), 3);
  std::map<std::pair<Side, int>, int> per_mol;
  for (const auto& s : single.shingles) per_mol[{s.side, s.mol_index}]++;
  ok = ok && per_mol.at({Side::Reactant, 0}) == kPerMoleculeCap;

  // total: six such molecules exceed the reaction budget
  std::string many = mol;
  for (int i = 0; i < 5; ++i) many += "." + mol;
  auto capped = symmetric_difference(side(many), side("P"), 3);
  ok = ok && static_cast<int>(capped.shingles.size()) == kReactionCap;
  per_mol.clear();
  int max_key2 = 0;
  for (const auto& s : capped.shingles) per_mol[{s.side, s.mol_index}]++;
  for (const auto& [key, count] : capped.per_key_counts) max_key2 = std::max(max_key2, count);
  for (const auto& [id, count] : per_mol) ok = ok && count <= kPerMoleculeCap;
  ok = ok && max_key2 <= kPerKeyCap;

  // determinism of the capped selection
  auto again = symmetric_difference(side(many), side("P"), 3);
  ok = ok && again.shingles.size() == capped.shingles.size();
  for (size_t i = 0; ok && i < capped.shingles.size(); ++i)
    ok = capped.shingles[i].key == again.shingles[i].key &&
         capped.shingles[i].atom_indices == again.shingles[i].atom_indices &&
         capped.shingles[i].side == again.shingles[i].side &&
         capped.shingles[i].mol_index == again.shingles[i].mol_index;

  report(4, ok,
         fmt("caps enforced: per key <= %.0f, per molecule <= %.0f, total == %.0f, "
             "deterministic", kPerKeyCap, kPerMoleculeCap, kReactionCap));
}

// ---- criterion 5: SE(3) invariance --------------------------------------

void criterion_se3() {
  Reaction rxn = make_reaction("CCO.CC(=O)O>>CC(=O)OCC.O");
  Rng crng(5);
  for (auto* side : {&rxn.reactants, &rxn.products})
    for (auto& mol : *side) {
      mol.coords.resize(mol.graph.atom_count());
      for (auto& p : mol.coords)
        p = {crng.uniform() * 4, crng.uniform() * 4, crng.uniform() * 4};
    }

  double worst32 = 0.0, worst64 = 0.0;
  for (Precision prec : {Precision::F32, Precision::F64}) {
    ModelParams params = init_params(ModelConfig::desk(), 11);
    params.config.compute = prec;
    const double base = run_model(params, rxn).prediction->at(0, 0);
    Rng mrng(31);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double a = mrng.uniform() * 6.28318530717958648;
      const double b = mrng.uniform() * 6.28318530717958648;
      const double c = mrng.uniform() * 6.28318530717958648;
      const double tx = mrng.uniform() * 10 - 5, ty = mrng.uniform() * 10 - 5,
                   tz = mrng.uniform() * 10 - 5;
      const double ca = std::cos(a), sa = std::sin(a);
      const double cb = std::cos(b), sb = std::sin(b);
      const double cc = std::cos(c), sc = std::sin(c);
      // Rz(a) * Ry(b) * Rx(c)
      const double R[3][3] = {
          {ca * cb, ca * sb * sc - sa * cc, ca * sb * cc + sa * sc},
          {sa * cb, sa * sb * sc + ca * cc, sa * sb * cc - ca * sc},
          {-sb, cb * sc, cb * cc}};
      Reaction moved = rxn;
      for (auto* side : {&moved.reactants, &moved.products})
        for (auto& mol : *side)
          for (auto& p : mol.coords) {
            const double x = p[0], y = p[1], z = p[2];
            p = {R[0][0] * x + R[0][1] * y + R[0][2] * z + tx,
                 R[1][0] * x + R[1][1] * y + R[1][2] * z + ty,
                 R[2][0] * x + R[2][1] * y + R[2][2] * z + tz};
          }
      worst = std::max(worst,
                       std::fabs(run_model(params, moved).prediction->at(0, 0) - base));
    }
    (prec == Precision::F32 ? worst32 : worst64) = worst;
  }
  report(5, worst32 < 1e-5 && worst64 < 1e-9,
         fmt("20 rigid motions move the prediction by at most %.2g (f32) / %.2g (f64)",
             worst32, worst64));
}

// ---- criterion 6: autodiff vs finite differences -------------------------

void criterion_gradients() {
  auto t0 = Clock::now();
  set_precision(Precision::F64);
  ModelConfig cfg = ModelConfig::desk();
  ModelParams params = init_params(cfg, 99);
  Reaction rxn = make_reaction("CCO.CC(=O)O>>CC(=O)OCC.O");
  Featurized feat = featurize(rxn, cfg);

  auto eval = [&]() {
    Value x0 = pool_shingles(params, feat.shingles, feat.canonical);
    std::vector<Value> p0 = initial_bias_values(params, feat.pf);
    return forward(params, x0, p0);
  };

  auto named = params.named();
  // one backward pass for all analytic grads
  for (auto& [name, v] : named) v->grad.assign(v->value.size(), 0.0);
  backward(eval().prediction);

  size_t total = 0;
  for (auto& [name, v] : named) total += v->value.size();
  Rng pick(123);
  const double eps = 1e-4;
  double max_rel = 0.0;
  for (int s = 0; s < 100; ++s) {
    size_t flat = pick.uniform_int(total);
    size_t t = 0;
    while (flat >= named[t].second->value.size()) {
      flat -= named[t].second->value.size();
      ++t;
    }
    Value& v = named[t].second;
    const double analytic = flat < v->grad.size() ? v->grad[flat] : 0.0;
    const double saved = v->value[flat];
    v->value[flat] = saved + eps;
    const double plus = eval().prediction->at(0, 0);
    v->value[flat] = saved - eps;
    const double minus = eval().prediction->at(0, 0);
    v->value[flat] = saved;
    const double numeric = (plus - minus) / (2 * eps);
    const double rel = std::fabs(numeric - analytic) /
                       std::max({1.0, std::fabs(numeric), std::fabs(analytic)});
    max_rel = std::max(max_rel, rel);
  }
  const double dt = seconds_since(t0);
  report(6, max_rel < 1e-4 && dt < 300.0,
         fmt("100 sampled parameters, max relative gradient error %.2g (%.1fs)",
             max_rel, dt));
}

// ---- criterion 7: overfit sanity ----------------------------------------

void criterion_overfit() {
  auto t0 = Clock::now();
  ModelConfig cfg = ModelConfig::desk();
  Rng gen(918);
  std::vector<LabeledReaction> data;
  for (int i = 0; i < 64; ++i) {
    Reaction rxn = generate_reaction(gen, 2, 6, i);
    Reaction canon = canonical_reaction(rxn);
    ShingleSet ss = symmetric_difference(canon.reactants, canon.products, cfg.radius);
    LabeledReaction lr;
    lr.reaction = std::move(rxn);
    lr.label = 0.5 * static_cast<double>(ss.shingles.size()) - 2.0;
    data.push_back(std::move(lr));
  }
  DatasetSplit split;
  split.train = data;
  split.test.assign(data.begin(), data.begin() + 8);
  TrainConfig tc;
  tc.epochs = 150;
  tc.batch_size = 8;
  tc.lr_init = 1e-3;
  tc.lr_min = 5e-5;
  tc.warmup_steps = 10;
  tc.warmup_lr = 5e-5;
  tc.dropout = 0.0;
  tc.seed = 12;
  FinetuneResult res = finetune(init_params(cfg, 31), split, tc);
  const double r2 = res.final_train_metrics.at("R2");
  const double dt = seconds_since(t0);
  report(7, r2 >= 0.95 && dt < 300.0,
         fmt("train R2 %.4f after 150 epochs on 64 synthetic reactions (%.0fs)", r2, dt));
}

// ---- criterion 8: DRFP contract ------------------------------------------

void criterion_drfp() {
  bool ok = true;

  auto fp_default = drfp(make_reaction("CCO>>CC=O"), 3);
  ok = ok && fp_default.length == 1024;

  auto zero = drfp(make_reaction("CCO.CC>>CC.CCO"), 3);
  ok = ok && zero.popcount() == 0;

  Rng gen(4242), shuf(11);
  int identical = 0;
  for (int i = 0; i < 100; ++i) {
    Reaction rxn = generate_reaction(gen, 3, 8, i);
    auto base = drfp(rxn, 3);
    Reaction perm = rxn;
    shuf.shuffle(perm.reactants);
    shuf.shuffle(perm.products);
    if (drfp(perm, 3).words == base.words) ++identical;
  }
  ok = ok && identical == 100;
  report(8, ok,
         fmt("length 1024, identical sides all-zero, %.0f/100 molecule-order "
             "permutations bit-identical", identical));
}

// ---- criterion 9: pseudo-label pipeline ----------------------------------

void criterion_pseudolabels() {
  auto t0 = Clock::now();
  Rng gen(808);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 1000; ++i) {
    auto fp = drfp(generate_reaction(gen, 3, 8, i), 3);
    std::vector<double> v(static_cast<size_t>(fp.length));
    for (int b = 0; b < fp.length; ++b) v[static_cast<size_t>(b)] = fp.test(b) ? 1.0 : 0.0;
    points.push_back(std::move(v));
  }
  bool ok = true;
  std::string detail;
  for (int k : {10, 50}) {
    KMeansResult km = kmeans(points, k, 7);
    for (size_t i = 1; i < km.inertia_history.size(); ++i)
      ok = ok && km.inertia_history[i] <= km.inertia_history[i - 1] + 1e-9;
    KMeansResult again = kmeans(points, k, 7);
    ok = ok && km.assignments == again.assignments;
  }

  // pretrain loss must drop by at least 30% over 20 epochs
  Rng rgen(606);
  std::vector<Reaction> rxns;
  for (int i = 0; i < 256; ++i) rxns.push_back(generate_reaction(rgen, 2, 6, i));
  ModelConfig pc = ModelConfig::desk();
  pc.task = Task::Pretrain;
  pc.pretrain_heads = {10, 50};
  TrainConfig tc;
  tc.epochs = 20;
  tc.batch_size = 16;
  tc.lr_init = 3e-4;
  tc.lr_min = 1e-5;
  tc.warmup_steps = 10;
  tc.warmup_lr = 1e-5;
  tc.dropout = 0.0;
  tc.seed = 5;
  tc.task = Task::Pretrain;
  PretrainResult res = pretrain(init_params(pc, 21), rxns, tc);
  const double drop =
      (res.epoch_losses.front() - res.epoch_losses.back()) / res.epoch_losses.front();
  ok = ok && drop >= 0.30;
  report(9, ok,
         fmt("kmeans monotone and deterministic for K in {10,50}; pretrain loss "
             "-%.0f%% over 20 epochs (%.0fs)", 100.0 * drop, seconds_since(t0)));
}

// ---- criterion 10: ablation switch fidelity ------------------------------

void criterion_ablations() {
  Reaction rxn = make_reaction("CCO.CC(=O)O>>CC(=O)OCC.O");
  ModelConfig cfg = ModelConfig::desk();
  bool ok = true;

  auto zeroed_run = [&](bool zero_g, bool zero_s) {
    ModelParams p = init_params(cfg, 7);
    if (zero_g) std::fill(p.pair_g.w->value.begin(), p.pair_g.w->value.end(), 0.0);
    if (zero_s) std::fill(p.pair_s.w->value.begin(), p.pair_s.w->value.end(), 0.0);
    return run_model(p, rxn).prediction->at(0, 0);
  };
  auto flagged_run = [&](bool pair_bias, bool geometric, bool structural) {
    ModelParams p = init_params(cfg, 7);
    p.config.use_pair_bias = pair_bias;
    p.config.use_geometric = geometric;
    p.config.use_structural = structural;
    return run_model(p, rxn).prediction->at(0, 0);
  };
  ok = ok && flagged_run(false, true, true) == zeroed_run(true, true);    // w/o P0
  ok = ok && flagged_run(true, false, true) == zeroed_run(true, false);   // w/o P_g
  ok = ok && flagged_run(true, true, false) == zeroed_run(false, true);   // w/o P_s

  // w/o symdiff: the union-mode flag equals manually substituting union
  // shingles into the same forward pass
  ModelParams p = init_params(cfg, 7);
  ModelParams pu = init_params(cfg, 7);
  pu.config.shingle_mode = ShingleMode::Union;
  const double flag_union = run_model(pu, rxn).prediction->at(0, 0);
  double manual_union = 0.0;
  {
    set_precision(cfg.compute);
    Featurized f = featurize(rxn, cfg);  // canonicalization is mode-independent
    ShingleSet un = union_shingles(f.canonical.reactants, f.canonical.products, cfg.radius);
    PairFeatures pf = pair_features(un, f.canonical);
    Value x0 = pool_shingles(p, un, f.canonical);
    std::vector<Value> p0 = initial_bias_values(p, pf);
    manual_union = forward(p, x0, p0).prediction->at(0, 0);
  }
  ok = ok && flag_union == manual_union;

  report(10, ok, "ablation flags bitwise equal manual zeroing / union substitution");
}

// ---- criterion 11: canonicalization stability ----------------------------

std::string random_corpus_molecule(Rng& rng) {
  static const char* plain[] = {"C", "N", "O", "S"};
  static const char* ring_atoms[] = {"C", "C", "C", "N", "O", "S"};
  static const char* brackets[] = {"[NH4+]", "[O-]", "[13C]", "[NH3+]", "[S-]"};
  std::string s;
  switch (rng.uniform_int(5)) {
    case 0: {  // chain
      int n = 1 + static_cast<int>(rng.uniform_int(10));
      for (int i = 0; i < n; ++i) s += plain[rng.uniform_int(4)];
      return s;
    }
    case 1: {  // ring with optional tail
      int ring = 3 + static_cast<int>(rng.uniform_int(5));
      s = std::string(ring_atoms[rng.uniform_int(6)]) + "1";
      for (int i = 1; i < ring; ++i) s += ring_atoms[rng.uniform_int(6)];
      s += "1";
      int tail = static_cast<int>(rng.uniform_int(4));
      for (int i = 0; i < tail; ++i) s += plain[rng.uniform_int(4)];
      return s;
    }
    case 2: {  // branched chain
      int n = 2 + static_cast<int>(rng.uniform_int(6));
      for (int i = 0; i < n; ++i) {
        s += plain[rng.uniform_int(4)];
        if (i == n / 2) s += std::string("(") + plain[rng.uniform_int(4)] + ")";
      }
      return s;
    }
    case 3: {  // substituted benzene
      s = "c1ccccc1";
      int tail = 1 + static_cast<int>(rng.uniform_int(3));
      std::string sub;
      for (int i = 0; i < tail; ++i) sub += plain[rng.uniform_int(4)];
      return sub + s;
    }
    default: {  // bracket atom plus chain
      s = brackets[rng.uniform_int(5)];
      int tail = static_cast<int>(rng.uniform_int(5));
      for (int i = 0; i < tail; ++i) s += plain[rng.uniform_int(4)];
      return s;
    }
  }
}

void criterion_canonicalization() {
  auto t0 = Clock::now();
  Rng gen(3030), shuffler(17);
  bool ok = true;
  std::string why;
  for (int i = 0; i < 500 && ok; ++i) {
    const std::string text = random_corpus_molecule(gen);
    auto mols = parse_smiles(text);
    const MolGraph& mol = mols[0];
    const std::string ref = canonical_smiles(mol);
    auto re = parse_smiles(ref);
    if (re.size() != 1 || canonical_smiles(re[0]) != ref) {
      ok = false;
      why = "round trip failed for " + text;
      break;
    }
    for (int t = 0; t < 100; ++t) {
      auto p = shuffler.permutation(mol.atom_count());
      if (canonical_smiles(relabel(mol, p)) != ref) {
        ok = false;
        why = "shuffle changed the canonical form of " + text;
        break;
      }
    }
  }
  report(11, ok,
         ok ? fmt("500 molecules x 100 shuffles canonicalize stably, round trip "
                  "holds (%.0fs)", seconds_since(t0))
            : "canonicalization: " + why);
}

}  // namespace

int main() {
  ModelParams desk_params = init_params(ModelConfig::desk(), 7);
  criterion_permutation(desk_params);
  criterion_symdiff_oracle();
  criterion_caps();
  criterion_se3();
  criterion_gradients();
  criterion_overfit();
  criterion_drfp();
  criterion_pseudolabels();
  criterion_ablations();
  criterion_canonicalization();
  if (failures == 0) {
    std::printf("acceptance: all 11 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
