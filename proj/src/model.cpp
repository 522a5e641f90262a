#include "rxnshingle/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "rxnshingle/error.hpp"
#include "rxnshingle/io.hpp"
#include "rxnshingle/smiles.hpp"

namespace rxnshingle {

using nlohmann::json;

namespace {

// Restore the thread precision on scope exit.
struct PrecisionGuard {
  Precision saved;
  explicit PrecisionGuard(Precision p) : saved(precision()) { set_precision(p); }
  ~PrecisionGuard() { set_precision(saved); }
};

}  // namespace

ModelConfig ModelConfig::desk() {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.heads = 4;
  cfg.dim = 64;
  cfg.ffn_dim = 128;
  cfg.kernels = 16;
  cfg.compute = Precision::F64;
  return cfg;
}

namespace {

const char* shingle_mode_name(ShingleMode m) {
  switch (m) {
    case ShingleMode::SymDiff: return "symdiff";
    case ShingleMode::Union: return "union";
    case ShingleMode::ReactantsOnly: return "reactants";
  }
  return "symdiff";
}

const char* task_name(Task t) {
  switch (t) {
    case Task::Regression: return "regression";
    case Task::Classification: return "classification";
    case Task::Pretrain: return "pretrain";
  }
  return "regression";
}

void validate_config(const ModelConfig& cfg) {
  if (cfg.layers < 1 || cfg.heads < 1 || cfg.dim < 1 || cfg.ffn_dim < 1 ||
      cfg.kernels < 1 || cfg.radius < 1)
    fail(ErrorKind::InvalidArgument, "config: counts must be positive");
  if (cfg.dim % cfg.heads != 0)
    fail(ErrorKind::InvalidArgument, "config: dim must be divisible by heads");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
    fail(ErrorKind::InvalidArgument, "config: dropout must be in [0, 1)");
  if (cfg.task == Task::Classification && cfg.num_classes < 2)
    fail(ErrorKind::InvalidArgument, "config: num_classes must be >= 2");
  if (cfg.task == Task::Pretrain) {
    if (cfg.pretrain_heads.empty())
      fail(ErrorKind::InvalidArgument, "config: pretrain needs cluster heads");
    for (int n : cfg.pretrain_heads)
      if (n < 2)
        fail(ErrorKind::InvalidArgument,
             "config: each pretrain head needs >= 2 clusters");
  }
}

json config_json(const ModelConfig& cfg) {
  json j;
  j["compute"] = cfg.compute == Precision::F32 ? "f32" : "f64";
  j["dim"] = cfg.dim;
  j["dropout"] = cfg.dropout;
  j["ffn_dim"] = cfg.ffn_dim;
  j["heads"] = cfg.heads;
  j["kernels"] = cfg.kernels;
  j["layers"] = cfg.layers;
  j["num_classes"] = cfg.num_classes;
  j["pretrain_heads"] = cfg.pretrain_heads;
  j["radius"] = cfg.radius;
  j["shingle_mode"] = shingle_mode_name(cfg.shingle_mode);
  j["task"] = task_name(cfg.task);
  j["use_geometric"] = cfg.use_geometric;
  j["use_pair_bias"] = cfg.use_pair_bias;
  j["use_structural"] = cfg.use_structural;
  return j;
}

ModelConfig config_from(const json& j) {
  if (!j.is_object()) fail(ErrorKind::ParseError, "config: expected an object");
  ModelConfig cfg;
  if (j.contains("profile")) {
    std::string p = j.at("profile").get<std::string>();
    if (p == "desk")
      cfg = ModelConfig::desk();
    else if (p != "paper")
      fail(ErrorKind::InvalidArgument, "config: unknown profile " + p);
  }
  try {
    if (j.contains("layers")) cfg.layers = j.at("layers").get<int>();
    if (j.contains("heads")) cfg.heads = j.at("heads").get<int>();
    if (j.contains("dim")) cfg.dim = j.at("dim").get<int>();
    if (j.contains("ffn_dim")) cfg.ffn_dim = j.at("ffn_dim").get<int>();
    if (j.contains("kernels")) cfg.kernels = j.at("kernels").get<int>();
    if (j.contains("radius")) cfg.radius = j.at("radius").get<int>();
    if (j.contains("dropout")) cfg.dropout = j.at("dropout").get<double>();
    if (j.contains("use_pair_bias"))
      cfg.use_pair_bias = j.at("use_pair_bias").get<bool>();
    if (j.contains("use_geometric"))
      cfg.use_geometric = j.at("use_geometric").get<bool>();
    if (j.contains("use_structural"))
      cfg.use_structural = j.at("use_structural").get<bool>();
    if (j.contains("num_classes"))
      cfg.num_classes = j.at("num_classes").get<int>();
    if (j.contains("pretrain_heads"))
      cfg.pretrain_heads = j.at("pretrain_heads").get<std::vector<int>>();
    if (j.contains("shingle_mode")) {
      std::string m = j.at("shingle_mode").get<std::string>();
      if (m == "symdiff") cfg.shingle_mode = ShingleMode::SymDiff;
      else if (m == "union") cfg.shingle_mode = ShingleMode::Union;
      else if (m == "reactants") cfg.shingle_mode = ShingleMode::ReactantsOnly;
      else fail(ErrorKind::InvalidArgument, "config: unknown shingle_mode " + m);
    }
    if (j.contains("task")) {
      std::string t = j.at("task").get<std::string>();
      if (t == "regression") cfg.task = Task::Regression;
      else if (t == "classification") cfg.task = Task::Classification;
      else if (t == "pretrain") cfg.task = Task::Pretrain;
      else fail(ErrorKind::InvalidArgument, "config: unknown task " + t);
    }
    if (j.contains("compute")) {
      std::string p = j.at("compute").get<std::string>();
      if (p == "f32") cfg.compute = Precision::F32;
      else if (p == "f64") cfg.compute = Precision::F64;
      else fail(ErrorKind::InvalidArgument, "config: unknown compute " + p);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace

std::string config_to_json(const ModelConfig& cfg) {
  return config_json(cfg).dump();
}

ModelConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  return config_from(j);
}

int atom_bucket_count() { return element_count() * 9 * 2 + 1; }

int atom_bucket(const AtomSpec& atom) {
  int e = element_index(atom.element);
  if (e < 0) return atom_bucket_count() - 1;  // reserved OOV bucket
  int charge = std::clamp(atom.charge, -4, 4) + 4;
  return (e * 9 + charge) * 2 + (atom.aromatic ? 1 : 0);
}

namespace {

Value normal_param(Rng& rng, int rows, int cols) {
  std::vector<double> v(static_cast<size_t>(rows) * cols);
  for (double& x : v) x = rng.normal(0.0, 0.02);
  return param(rows, cols, std::move(v));
}

Value const_param(int rows, int cols, double fill) {
  return param(rows, cols,
               std::vector<double>(static_cast<size_t>(rows) * cols, fill));
}

// Grid-initialized kernel bank; only the projection w is random.
GkptTensors init_bank(Rng& rng, int K, int out_dim, double lo, double hi) {
  GkptParams g = init_gkpt_grid(K, out_dim, lo, hi);
  GkptTensors t;
  t.e1 = param(kNumPairTypes, K, std::move(g.e1));
  t.e2 = param(kNumPairTypes, K, std::move(g.e2));
  t.mu = param(1, K, std::move(g.mu));
  t.sigma = param(1, K, std::move(g.sigma));
  t.w = normal_param(rng, K, out_dim);
  return t;
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  PrecisionGuard guard(Precision::F64);  // master weights stay full precision
  Rng rng(seed);
  ModelParams p;
  p.config = cfg;
  const int F = cfg.dim;
  p.atom_embedding = normal_param(rng, atom_bucket_count(), F);
  p.atom_kernels = init_bank(rng, cfg.kernels, F, 0.0, 10.0);
  p.atom_mix = normal_param(rng, F, F);
  p.atom_ln_g = const_param(1, F, 1.0);
  p.atom_ln_b = const_param(1, F, 0.0);
  p.pair_g = init_bank(rng, cfg.kernels, cfg.heads, 0.0, 10.0);
  p.pair_s = init_bank(rng, cfg.kernels, cfg.heads, 0.0, 1.0);
  p.null_token = normal_param(rng, 1, F);
  p.ssum = normal_param(rng, 1, F);
  for (int l = 0; l < cfg.layers; ++l) {
    BlockParams b;
    b.wq = normal_param(rng, F, F);
    b.bq = const_param(1, F, 0.0);
    b.wk = normal_param(rng, F, F);
    b.bk = const_param(1, F, 0.0);
    b.wv = normal_param(rng, F, F);
    b.bv = const_param(1, F, 0.0);
    b.wo = normal_param(rng, F, F);
    b.bo = const_param(1, F, 0.0);
    b.ln1_g = const_param(1, F, 1.0);
    b.ln1_b = const_param(1, F, 0.0);
    b.ff1 = normal_param(rng, F, cfg.ffn_dim);
    b.ff1_b = const_param(1, cfg.ffn_dim, 0.0);
    b.ff2 = normal_param(rng, cfg.ffn_dim, F);
    b.ff2_b = const_param(1, F, 0.0);
    b.ln2_g = const_param(1, F, 1.0);
    b.ln2_b = const_param(1, F, 0.0);
    p.blocks.push_back(std::move(b));
  }
  p.pred_w1 = normal_param(rng, F, F);
  p.pred_b1 = const_param(1, F, 0.0);
  p.pred_w2 = normal_param(rng, F, cfg.output_dim());
  p.pred_b2 = const_param(1, cfg.output_dim(), 0.0);
  if (cfg.task == Task::Pretrain) {
    for (int n_k : cfg.pretrain_heads) {
      p.head_w.push_back(normal_param(rng, F, n_k));
      p.head_b.push_back(const_param(1, n_k, 0.0));
    }
  }
  return p;
}

ModelParams clone_params(const ModelParams& params) {
  ModelParams out = init_params(params.config, 0);
  auto src = params.named();
  auto dst = out.named();
  for (size_t i = 0; i < src.size(); ++i) dst[i].second->value = src[i].second->value;
  out.label_mean = params.label_mean;
  out.label_std = params.label_std;
  return out;
}

std::vector<std::pair<std::string, Value>> ModelParams::named() const {
  std::vector<std::pair<std::string, Value>> out;
  auto bank = [&out](const std::string& prefix, const GkptTensors& t) {
    out.emplace_back(prefix + ".e1", t.e1);
    out.emplace_back(prefix + ".e2", t.e2);
    out.emplace_back(prefix + ".mu", t.mu);
    out.emplace_back(prefix + ".sigma", t.sigma);
    out.emplace_back(prefix + ".w", t.w);
  };
  out.emplace_back("atom_embedding", atom_embedding);
  bank("atom_kernels", atom_kernels);
  out.emplace_back("atom_mix", atom_mix);
  out.emplace_back("atom_ln_g", atom_ln_g);
  out.emplace_back("atom_ln_b", atom_ln_b);
  bank("pair_g", pair_g);
  bank("pair_s", pair_s);
  out.emplace_back("null_token", null_token);
  out.emplace_back("ssum", ssum);
  for (size_t i = 0; i < blocks.size(); ++i) {
    const std::string pre = "block" + std::to_string(i) + ".";
    const BlockParams& b = blocks[i];
    out.emplace_back(pre + "wq", b.wq);
    out.emplace_back(pre + "bq", b.bq);
    out.emplace_back(pre + "wk", b.wk);
    out.emplace_back(pre + "bk", b.bk);
    out.emplace_back(pre + "wv", b.wv);
    out.emplace_back(pre + "bv", b.bv);
    out.emplace_back(pre + "wo", b.wo);
    out.emplace_back(pre + "bo", b.bo);
    out.emplace_back(pre + "ln1_g", b.ln1_g);
    out.emplace_back(pre + "ln1_b", b.ln1_b);
    out.emplace_back(pre + "ff1", b.ff1);
    out.emplace_back(pre + "ff1_b", b.ff1_b);
    out.emplace_back(pre + "ff2", b.ff2);
    out.emplace_back(pre + "ff2_b", b.ff2_b);
    out.emplace_back(pre + "ln2_g", b.ln2_g);
    out.emplace_back(pre + "ln2_b", b.ln2_b);
  }
  out.emplace_back("pred.w1", pred_w1);
  out.emplace_back("pred.b1", pred_b1);
  out.emplace_back("pred.w2", pred_w2);
  out.emplace_back("pred.b2", pred_b2);
  for (size_t i = 0; i < head_w.size(); ++i) {
    out.emplace_back("head" + std::to_string(i) + ".w", head_w[i]);
    out.emplace_back("head" + std::to_string(i) + ".b", head_b[i]);
  }
  return out;
}

std::vector<Value> ModelParams::trainable() const {
  std::vector<Value> out;
  for (auto& [name, v] : named()) out.push_back(v);
  return out;
}

Featurized featurize(const Reaction& rxn, const ModelConfig& cfg) {
  Featurized f;
  f.canonical = canonical_reaction(rxn);
  switch (cfg.shingle_mode) {
    case ShingleMode::SymDiff:
      f.shingles = symmetric_difference(f.canonical.reactants,
                                        f.canonical.products, cfg.radius);
      break;
    case ShingleMode::Union:
      f.shingles = union_shingles(f.canonical.reactants, f.canonical.products,
                                  cfg.radius);
      break;
    case ShingleMode::ReactantsOnly:
      f.shingles = reactant_only_shingles(f.canonical.reactants, cfg.radius);
      break;
  }
  f.pf = pair_features(f.shingles, f.canonical);
  return f;
}

namespace {

// K kernel responses per row for scalar inputs x with per-row pair types.
Value gkpt_rows(const GkptTensors& bank, const std::vector<double>& x,
                const std::vector<int>& types) {
  const int m = static_cast<int>(x.size());
  Value e1 = embedding_lookup(bank.e1, types);
  Value e2 = embedding_lookup(bank.e2, types);
  Value t = add(mul_colvec(e1, constant(m, 1, x)), e2);
  Value inv_sig = reciprocal(clamp_min(bank.sigma, kSigmaFloor));
  Value z = mul_rowvec(sub_rowvec(t, bank.mu), inv_sig);
  Value bell = exp_op(scale(square(z), -0.5));
  return mul_rowvec(bell, scale(inv_sig, 0.3989422804014326779));
}

double dist3(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

Value encode_atoms(const ModelParams& params, const Conformer& mol) {
  const MolGraph& g = mol.graph;
  const int n = g.atom_count();
  if (n < 1) fail(ErrorKind::EmptyInput, "encode_atoms: empty molecule");
  if (static_cast<int>(mol.coords.size()) != n)
    fail(ErrorKind::MissingCoordinates,
         "encode_atoms: conformer must carry one coordinate per atom");
  std::vector<int> buckets(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) buckets[static_cast<size_t>(i)] = atom_bucket(g.atom(i));
  Value types = embedding_lookup(params.atom_embedding, buckets);
  if (n == 1)
    return layernorm(types, params.atom_ln_g, params.atom_ln_b);
  // All ordered pairs (k, j), row index k*n + j; the diagonal is masked out.
  const size_t m = static_cast<size_t>(n) * n;
  std::vector<double> dist(m, 0.0), offdiag(m, 0.0);
  std::vector<int> ptype(m, 0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      if (k == j) continue;
      const size_t idx = static_cast<size_t>(k) * n + j;
      dist[idx] = dist3(mol.coords[static_cast<size_t>(k)],
                        mol.coords[static_cast<size_t>(j)]);
      offdiag[idx] = 1.0;
      ptype[idx] = g.bond_between(k, j) >= 0 ? 1 : 0;
    }
  Value kern = gkpt_rows(params.atom_kernels, dist, ptype);
  Value masked = mul_colvec(kern, constant(static_cast<int>(m), 1, offdiag));
  Value feat = matmul(masked, params.atom_kernels.w);  // n*n x F
  Value msg = matmul(block_row_sum(feat, n), params.atom_mix);
  return layernorm(add(types, msg), params.atom_ln_g, params.atom_ln_b);
}

Value pool_shingles(const ModelParams& params, const ShingleSet& shingles,
                    const Reaction& canonical) {
  if (shingles.empty()) return params.null_token;
  // Encode each referenced molecule once, reactants before products, in
  // molecule-index order; offsets index into the row-concatenated matrix.
  std::set<std::pair<int, int>> used;
  for (const Shingle& s : shingles.shingles)
    used.insert({static_cast<int>(s.side), s.mol_index});
  std::map<std::pair<int, int>, std::pair<int, int>> span;  // -> (offset, atoms)
  Value all;
  int offset = 0;
  for (const auto& key : used) {
    const auto& side_mols =
        key.first == 0 ? canonical.reactants : canonical.products;
    if (key.second < 0 || key.second >= static_cast<int>(side_mols.size()))
      fail(ErrorKind::IndexOutOfRange, "pool_shingles: molecule index");
    const Conformer& mol = side_mols[static_cast<size_t>(key.second)];
    Value emb = encode_atoms(params, mol);
    span[key] = {offset, emb->rows};
    offset += emb->rows;
    all = all ? concat_rows(all, emb) : emb;
  }
  const int n_s = static_cast<int>(shingles.shingles.size());
  std::vector<double> pool(static_cast<size_t>(n_s) * offset, 0.0);
  for (int i = 0; i < n_s; ++i) {
    const Shingle& s = shingles.shingles[static_cast<size_t>(i)];
    const auto [base, atoms] = span.at({static_cast<int>(s.side), s.mol_index});
    if (s.atom_indices.empty())
      fail(ErrorKind::IndexOutOfRange, "pool_shingles: shingle with no atoms");
    const double weight = 1.0 / static_cast<double>(s.atom_indices.size());
    for (int a : s.atom_indices) {
      if (a < 0 || a >= atoms)
        fail(ErrorKind::IndexOutOfRange, "pool_shingles: atom index");
      pool[static_cast<size_t>(i) * offset + base + a] = weight;
    }
  }
  return matmul(constant(n_s, offset, std::move(pool)), all);
}

std::vector<Value> initial_bias_values(const ModelParams& params,
                                       const PairFeatures& pf) {
  const ModelConfig& cfg = params.config;
  const int n = pf.n;
  bool geo = cfg.use_pair_bias && cfg.use_geometric;
  bool str = cfg.use_pair_bias && cfg.use_structural;
  std::vector<Value> out;
  out.reserve(static_cast<size_t>(cfg.heads));
  if (!geo && !str) {
    for (int h = 0; h < cfg.heads; ++h) out.push_back(zeros(n, n));
    return out;
  }
  const size_t m = static_cast<size_t>(n) * n;
  std::vector<int> ptype(m);
  for (size_t i = 0; i < m; ++i) ptype[i] = pf.d_e[i] != 0.0 ? 1 : 0;
  Value flat;  // n*n x heads
  if (geo) flat = matmul(gkpt_rows(params.pair_g, pf.d_g, ptype), params.pair_g.w);
  if (str) {
    Value s = matmul(gkpt_rows(params.pair_s, pf.d_s, ptype), params.pair_s.w);
    flat = flat ? add(flat, s) : s;
  }
  for (int h = 0; h < cfg.heads; ++h)
    out.push_back(reshape(slice_cols(flat, h, h + 1), n, n));
  return out;
}

namespace {

Value apply_dropout(const Value& x, double p, bool training, Rng* rng) {
  if (!training || p <= 0.0) return x;
  if (rng == nullptr)
    fail(ErrorKind::InvalidArgument, "dropout in training mode needs an rng");
  std::vector<double> mask(x->size());
  const double keep = 1.0 - p;
  for (double& v : mask) v = rng->uniform() < p ? 0.0 : 1.0 / keep;
  return mul(x, constant(x->rows, x->cols, std::move(mask)));
}

}  // namespace

Forward forward(const ModelParams& params, const Value& x0,
                const std::vector<Value>& p0, bool training, Rng* dropout_rng) {
  const ModelConfig& cfg = params.config;
  const int heads = cfg.heads, dh = cfg.head_dim(), f_dim = cfg.dim;
  if (x0->cols != f_dim)
    fail(ErrorKind::ShapeMismatch, "forward: X0 width != model dim");
  if (static_cast<int>(p0.size()) != heads)
    fail(ErrorKind::ShapeMismatch, "forward: one bias matrix per head");
  for (const Value& p : p0)
    if (p->rows != x0->rows || p->cols != x0->rows)
      fail(ErrorKind::ShapeMismatch, "forward: bias must be N_s x N_s");
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  Value x = concat_rows(params.ssum, x0);  // [SSUM] prepended once
  std::vector<Value> bias(p0.size());
  for (size_t h = 0; h < p0.size(); ++h) bias[h] = pad_zero_row_col(p0[h]);
  for (const BlockParams& b : params.blocks) {
    Value q = add_rowvec(matmul(x, b.wq), b.bq);
    Value k = add_rowvec(matmul(x, b.wk), b.bk);
    Value v = add_rowvec(matmul(x, b.wv), b.bv);
    std::vector<Value> head_out;
    head_out.reserve(static_cast<size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      Value qh = slice_cols(q, h * dh, (h + 1) * dh);
      Value kh = slice_cols(k, h * dh, (h + 1) * dh);
      Value vh = slice_cols(v, h * dh, (h + 1) * dh);
      Value scores = scale(matmul(qh, transpose(kh)), inv_sqrt_dh);
      // The biased score matrix is both this layer's softmax argument and
      // the next layer's bias.
      Value biased = add(scores, bias[static_cast<size_t>(h)]);
      bias[static_cast<size_t>(h)] = biased;
      head_out.push_back(matmul(softmax_lastdim(biased), vh));
    }
    Value attn = add_rowvec(matmul(concat_cols(head_out), b.wo), b.bo);
    attn = apply_dropout(attn, cfg.dropout, training, dropout_rng);
    x = layernorm(add(x, attn), b.ln1_g, b.ln1_b);
    Value ff = add_rowvec(
        matmul(gelu(add_rowvec(matmul(x, b.ff1), b.ff1_b)), b.ff2), b.ff2_b);
    ff = apply_dropout(ff, cfg.dropout, training, dropout_rng);
    x = layernorm(add(x, ff), b.ln2_g, b.ln2_b);
  }
  Forward out;
  out.reaction_embedding = slice_row(x, 0);
  Value hidden = gelu(add_rowvec(matmul(out.reaction_embedding, params.pred_w1),
                                 params.pred_b1));
  out.prediction = add_rowvec(matmul(hidden, params.pred_w2), params.pred_b2);
  return out;
}

Forward run_model(const ModelParams& params, const Reaction& rxn, bool training,
                  Rng* dropout_rng) {
  PrecisionGuard guard(params.config.compute);
  Featurized f = featurize(rxn, params.config);
  Value x0 = pool_shingles(params, f.shingles, f.canonical);
  std::vector<Value> p0 = initial_bias_values(params, f.pf);
  return forward(params, x0, p0, training, dropout_rng);
}

double predict_value(const ModelParams& params, const Reaction& rxn) {
  Forward f = run_model(params, rxn);
  if (params.config.task == Task::Classification) {
    int best = 0;
    for (int c = 1; c < f.prediction->cols; ++c)
      if (f.prediction->at(0, c) > f.prediction->at(0, best)) best = c;
    return static_cast<double>(best);
  }
  return f.prediction->at(0, 0) * params.label_std + params.label_mean;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint i/o assumes a little-endian host");

constexpr char kMagic[4] = {'R', 'X', 'S', 'H'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Cursor {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size())
      fail(ErrorKind::BadCheckpoint, "checkpoint file is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<unsigned char>(buf[pos++]);
  }
  std::string bytes(size_t n) {
    need(n);
    std::string out = buf.substr(pos, n);
    pos += n;
    return out;
  }
};

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  json header;
  header["config"] = config_json(params.config);
  header["label_mean"] = params.label_mean;
  header["label_std"] = params.label_std;
  header["version"] = version_string();
  const std::string header_text = header.dump();
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, header_text.size());
  out += header_text;
  const auto tensors = params.named();
  put_u64(out, tensors.size());
  for (const auto& [name, v] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    out.push_back(0);  // dtype: f64
    put_u32(out, 2);   // ndim
    put_u64(out, static_cast<std::uint64_t>(v->rows));
    put_u64(out, static_cast<std::uint64_t>(v->cols));
    const size_t byte_len = v->value.size() * sizeof(double);
    const size_t at = out.size();
    out.resize(at + byte_len);
    std::memcpy(out.data() + at, v->value.data(), byte_len);
  }
  write_file_atomic(path, out);
}

ModelParams load_checkpoint(const std::string& path) {
  const std::string buf = read_file(path);
  Cursor in{buf};
  if (in.bytes(4) != std::string(kMagic, 4))
    fail(ErrorKind::BadCheckpoint, "not a checkpoint file: " + path);
  if (in.u32() != kCheckpointVersion)
    fail(ErrorKind::BadCheckpoint, "unsupported checkpoint version");
  json header;
  try {
    header = json::parse(in.bytes(in.u64()));
  } catch (const json::exception& e) {
    fail(ErrorKind::BadCheckpoint, std::string("bad header: ") + e.what());
  }
  ModelConfig cfg = config_from(header.at("config"));
  ModelParams params = init_params(cfg, 0);  // every tensor is overwritten
  params.label_mean = header.at("label_mean").get<double>();
  params.label_std = header.at("label_std").get<double>();
  std::map<std::string, Value> by_name;
  for (auto& [name, v] : params.named()) by_name[name] = v;
  const std::uint64_t n_tensors = in.u64();
  if (n_tensors != by_name.size())
    fail(ErrorKind::BadCheckpoint, "tensor count does not match config");
  std::set<std::string> seen;
  for (std::uint64_t t = 0; t < n_tensors; ++t) {
    const std::string name = in.bytes(in.u32());
    auto it = by_name.find(name);
    if (it == by_name.end())
      fail(ErrorKind::BadCheckpoint, "unexpected tensor: " + name);
    if (!seen.insert(name).second)
      fail(ErrorKind::BadCheckpoint, "duplicate tensor: " + name);
    if (in.u8() != 0)
      fail(ErrorKind::BadCheckpoint, "unsupported dtype for " + name);
    if (in.u32() != 2)
      fail(ErrorKind::BadCheckpoint, "unsupported rank for " + name);
    const std::uint64_t rows = in.u64(), cols = in.u64();
    Value& v = it->second;
    if (rows != static_cast<std::uint64_t>(v->rows) ||
        cols != static_cast<std::uint64_t>(v->cols))
      fail(ErrorKind::BadCheckpoint, "shape mismatch for " + name);
    const size_t byte_len = v->value.size() * sizeof(double);
    in.need(byte_len);
    std::memcpy(v->value.data(), buf.data() + in.pos, byte_len);
    in.pos += byte_len;
  }
  if (in.pos != buf.size())
    fail(ErrorKind::BadCheckpoint, "trailing bytes after tensor data");
  return params;
}

}  // namespace rxnshingle
