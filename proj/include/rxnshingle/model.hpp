#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rxnshingle/pairwise.hpp"
#include "rxnshingle/rng.hpp"
#include "rxnshingle/shingles.hpp"
#include "rxnshingle/tensor.hpp"

namespace rxnshingle {

enum class Task { Regression, Classification, Pretrain };
enum class ShingleMode { SymDiff, Union, ReactantsOnly };

// Defaults follow the published hyperparameters; desk() is the scaled-down
// profile used by tests and the acceptance suite.
struct ModelConfig {
  int layers = 4;
  int heads = 64;
  int dim = 512;  // F
  int ffn_dim = 2048;
  int kernels = 128;  // K per GKPT bank
  int radius = 3;     // shingle r_max
  double dropout = 0.1;
  bool use_pair_bias = true;   // false: P0 = 0 ("w/o P0"); recurrence kept
  bool use_geometric = true;   // false: drop the GKPT_g branch ("w/o P_g")
  bool use_structural = true;  // false: drop the GKPT_s branch ("w/o P_s")
  ShingleMode shingle_mode = ShingleMode::SymDiff;  // Union = "w/o symdiff"
  Task task = Task::Regression;
  int num_classes = 2;
  std::vector<int> pretrain_heads = {10, 50};  // cluster granularities
  Precision compute = Precision::F32;

  static ModelConfig desk();

  int head_dim() const { return dim / heads; }
  int output_dim() const {
    return task == Task::Classification ? num_classes : 1;
  }
};

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const std::string& text);

// One GKPT bank as tape leaves. e1/e2 are N_e x K, mu/sigma 1 x K, w K x D
// where D is heads for the pair bias and F for the atom encoder.
struct GkptTensors {
  Value e1, e2, mu, sigma, w;
};

struct BlockParams {
  Value wq, bq, wk, bk, wv, bv, wo, bo;
  Value ln1_g, ln1_b;
  Value ff1, ff1_b, ff2, ff2_b;
  Value ln2_g, ln2_b;
};

struct ModelParams {
  ModelConfig config;
  // atom encoder
  Value atom_embedding;  // buckets x F
  GkptTensors atom_kernels;
  Value atom_mix;  // F x F
  Value atom_ln_g, atom_ln_b;
  // pair bias kernels
  GkptTensors pair_g, pair_s;
  // sequence tokens
  Value null_token;  // 1 x F, stands in for an empty shingle set
  Value ssum;        // 1 x F summary token
  std::vector<BlockParams> blocks;
  // predictor
  Value pred_w1, pred_b1, pred_w2, pred_b2;
  // pretraining classification heads
  std::vector<Value> head_w, head_b;
  // regression label standardization (train statistics)
  double label_mean = 0.0;
  double label_std = 1.0;

  std::vector<std::pair<std::string, Value>> named() const;
  std::vector<Value> trainable() const;
};

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// Deep copy: fresh tape leaves with identical values.
ModelParams clone_params(const ModelParams& params);

// Atom-type bucket over (element, clamped charge, aromatic flag); unknown
// elements land in the reserved OOV bucket.
int atom_bucket(const AtomSpec& atom);
int atom_bucket_count();

struct Featurized {
  Reaction canonical;   // canonical molecule/atom order, coords filled
  ShingleSet shingles;  // empty means the null-token path
  PairFeatures pf;
};

Featurized featurize(const Reaction& rxn, const ModelConfig& cfg);

// Per-atom embeddings for one molecule (coords required).
Value encode_atoms(const ModelParams& params, const Conformer& mol);

// N_s x F pooled shingle embeddings over the canonical reaction; the null
// token row when the set is empty.
Value pool_shingles(const ModelParams& params, const ShingleSet& shingles,
                    const Reaction& canonical);

// Per-head N_s x N_s initial bias P0 (honors the ablation flags).
std::vector<Value> initial_bias_values(const ModelParams& params,
                                       const PairFeatures& pf);

struct Forward {
  Value prediction;           // 1 x 1 regression value or 1 x C logits
  Value reaction_embedding;   // 1 x F final [SSUM] row
};

// Encoder stack over pooled shingles + bias, then the MLP predictor.
Forward forward(const ModelParams& params, const Value& x0,
                const std::vector<Value>& p0, bool training = false,
                Rng* dropout_rng = nullptr);

// featurize + pool + bias + forward in one call.
Forward run_model(const ModelParams& params, const Reaction& rxn,
                  bool training = false, Rng* dropout_rng = nullptr);

// Regression prediction in label units (inverts standardization).
double predict_value(const ModelParams& params, const Reaction& rxn);

void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace rxnshingle
