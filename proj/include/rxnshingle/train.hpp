#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rxnshingle/model.hpp"

namespace rxnshingle {

struct TrainConfig {
  int epochs = 150;
  int batch_size = 64;
  double lr_init = 5e-5;
  double lr_min = 1e-6;
  int warmup_steps = 2000;
  double warmup_lr = 5e-7;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  Task task = Task::Regression;
};

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text);

// Linear warmup from warmup_lr to lr_init, then cosine decay to lr_min.
double lr_at(const TrainConfig& cfg, int step, int total_steps);

// Adam with f64 master weights; moment buffers keyed by parameter order.
class Adam {
 public:
  explicit Adam(const std::vector<Value>& params);
  void step(const std::vector<Value>& params, double lr);

 private:
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
};

// Lloyd's algorithm with k-means++ seeding; deterministic given seed.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iter = 100);

struct PseudoLabels {
  std::vector<std::vector<int>> labels;  // [head][reaction]
  std::vector<int> cluster_counts;       // N_k per head
};

// DRFP -> k-means per granularity in cfg.pretrain_heads.
PseudoLabels make_pseudo_labels(const std::vector<Reaction>& reactions,
                                const ModelConfig& cfg, std::uint64_t seed,
                                int nbits = 1024);

// Mean over the batch of summed cross-entropies across heads.
Value pretrain_loss(const ModelParams& params, const Value& embeddings,
                    const std::vector<std::vector<int>>& labels_per_head);

struct PretrainResult {
  ModelParams params;
  std::vector<double> epoch_losses;
  PseudoLabels pseudo;
};

PretrainResult pretrain(ModelParams params,
                        const std::vector<Reaction>& reactions,
                        const TrainConfig& cfg);

// MAE / RMSE / R2. R2 needs n >= 2.
std::map<std::string, double> regression_metrics(
    const std::vector<double>& preds, const std::vector<double>& labels);

// ACC / MCC / CEN. CEN follows Wei et al. 2010 (confusion entropy with
// log base 2(N-1); plain base 2 in the binary case).
std::map<std::string, double> classification_metrics(
    const std::vector<int>& preds, const std::vector<int>& labels);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  std::map<std::string, double> test_metrics;
};

struct FinetuneResult {
  ModelParams best;  // best test epoch (initial params when epochs == 0)
  ModelParams last;  // end-of-training state
  int best_epoch = -1;
  std::vector<EpochStats> history;
  std::map<std::string, double> best_test_metrics;
  std::map<std::string, double> final_train_metrics;
  std::map<std::string, double> final_test_metrics;
};

FinetuneResult finetune(ModelParams params, const DatasetSplit& split,
                        const TrainConfig& cfg);

// Predictions for a labeled list in label units; labels returned alongside.
std::pair<std::vector<double>, std::vector<double>> predict_all(
    const ModelParams& params, const std::vector<LabeledReaction>& data);

struct PermutationReport {
  std::vector<double> stds;  // per reaction
  double max_std = 0.0;
  double mean_std = 0.0;
  int n_perms = 0;
};

// Shuffle molecule order and relabel atoms (coords permuted consistently),
// predict each variant, and report the per-reaction std. n_perms >= 2.
PermutationReport permutation_test(
    const std::function<double(const Reaction&)>& predict,
    const std::vector<Reaction>& reactions, int n_perms, std::uint64_t seed);

// A single random variant, exposed for tests.
Reaction permute_reaction(const Reaction& rxn, Rng& rng);

// Deliberately order-sensitive reference predictor used to validate the
// permutation-test harness itself.
double order_sensitive_prediction(const Reaction& rxn);

}  // namespace rxnshingle
