#include "rxnshingle/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "rxnshingle/error.hpp"
#include "rxnshingle/fingerprint.hpp"
#include "rxnshingle/smiles.hpp"

namespace rxnshingle {

using nlohmann::json;

namespace {

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0) fail(ErrorKind::InvalidArgument, "train: epochs must be >= 0");
  if (cfg.batch_size < 1)
    fail(ErrorKind::InvalidArgument, "train: batch_size must be >= 1");
  if (cfg.warmup_steps < 0)
    fail(ErrorKind::InvalidArgument, "train: warmup_steps must be >= 0");
  if (cfg.lr_min > cfg.lr_init)
    fail(ErrorKind::InvalidArgument, "train: lr_min must be <= lr_init");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
    fail(ErrorKind::InvalidArgument, "train: dropout must be in [0, 1)");
}

const char* task_text(Task t) {
  switch (t) {
    case Task::Regression: return "regression";
    case Task::Classification: return "classification";
    case Task::Pretrain: return "pretrain";
  }
  return "regression";
}

}  // namespace

std::string train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["batch_size"] = cfg.batch_size;
  j["dropout"] = cfg.dropout;
  j["epochs"] = cfg.epochs;
  j["lr_init"] = cfg.lr_init;
  j["lr_min"] = cfg.lr_min;
  j["seed"] = cfg.seed;
  j["task"] = task_text(cfg.task);
  j["warmup_lr"] = cfg.warmup_lr;
  j["warmup_steps"] = cfg.warmup_steps;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("train config: ") + e.what());
  }
  if (!j.is_object())
    fail(ErrorKind::ParseError, "train config: expected an object");
  TrainConfig cfg;
  try {
    if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
    if (j.contains("lr_init")) cfg.lr_init = j.at("lr_init").get<double>();
    if (j.contains("lr_min")) cfg.lr_min = j.at("lr_min").get<double>();
    if (j.contains("warmup_steps"))
      cfg.warmup_steps = j.at("warmup_steps").get<int>();
    if (j.contains("warmup_lr")) cfg.warmup_lr = j.at("warmup_lr").get<double>();
    if (j.contains("dropout")) cfg.dropout = j.at("dropout").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("task")) {
      std::string t = j.at("task").get<std::string>();
      if (t == "regression") cfg.task = Task::Regression;
      else if (t == "classification") cfg.task = Task::Classification;
      else if (t == "pretrain") cfg.task = Task::Pretrain;
      else fail(ErrorKind::InvalidArgument, "train config: unknown task " + t);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("train config: ") + e.what());
  }
  validate_train_config(cfg);
  return cfg;
}

double lr_at(const TrainConfig& cfg, int step, int total_steps) {
  if (step < 0) step = 0;
  if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
    return cfg.warmup_lr + (cfg.lr_init - cfg.warmup_lr) *
                               (static_cast<double>(step) / cfg.warmup_steps);
  const int span = std::max(1, total_steps - cfg.warmup_steps);
  double t = static_cast<double>(step - cfg.warmup_steps) / span;
  t = std::clamp(t, 0.0, 1.0);
  return cfg.lr_min +
         0.5 * (cfg.lr_init - cfg.lr_min) * (1.0 + std::cos(std::numbers::pi * t));
}

Adam::Adam(const std::vector<Value>& params) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Value& p : params) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::step(const std::vector<Value>& params, double lr) {
  if (params.size() != m_.size())
    fail(ErrorKind::ShapeMismatch, "adam: parameter list changed size");
  ++t_;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    Node& p = *params[i];
    if (p.grad.size() != p.size())
      fail(ErrorKind::ShapeMismatch, "adam: parameter has no gradient");
    for (size_t j = 0; j < p.size(); ++j) {
      const double g = p.grad[j];
      m_[i][j] = b1 * m_[i][j] + (1.0 - b1) * g;
      v_[i][j] = b2 * v_[i][j] + (1.0 - b2) * g * g;
      p.value[j] -= lr * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + eps);
    }
  }
}

namespace {

void zero_grads(const std::vector<Value>& params) {
  for (const Value& p : params) p->grad.assign(p->size(), 0.0);
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iter) {
  const int n = static_cast<int>(points.size());
  if (n == 0) fail(ErrorKind::EmptyDataset, "kmeans: no points");
  if (k < 1) fail(ErrorKind::InvalidArgument, "kmeans: k must be >= 1");
  if (k > n) fail(ErrorKind::KTooLarge, "kmeans: more clusters than points");
  const size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim)
      fail(ErrorKind::LengthMismatch, "kmeans: inconsistent point dimensions");

  Rng rng(seed);
  KMeansResult res;
  // k-means++ seeding
  res.centroids.push_back(points[rng.uniform_int(static_cast<uint64_t>(n))]);
  std::vector<double> d2(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    d2[static_cast<size_t>(i)] = sq_dist(points[static_cast<size_t>(i)], res.centroids[0]);
  while (static_cast<int>(res.centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
    } else {
      double r = rng.uniform() * total;
      pick = n - 1;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[static_cast<size_t>(i)];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    }
    res.centroids.push_back(points[static_cast<size_t>(pick)]);
    for (int i = 0; i < n; ++i)
      d2[static_cast<size_t>(i)] =
          std::min(d2[static_cast<size_t>(i)],
                   sq_dist(points[static_cast<size_t>(i)], res.centroids.back()));
  }

  res.assignments.assign(static_cast<size_t>(n), -1);
  std::vector<double> point_cost(static_cast<size_t>(n), 0.0);
  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment step (ties to the lowest cluster index)
    bool changed = false;
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(points[static_cast<size_t>(i)], res.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points[static_cast<size_t>(i)],
                                 res.centroids[static_cast<size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (res.assignments[static_cast<size_t>(i)] != best) changed = true;
      res.assignments[static_cast<size_t>(i)] = best;
      point_cost[static_cast<size_t>(i)] = best_d;
      inertia += best_d;
    }
    // empty-cluster repair: seed each empty cluster with the farthest point
    // of the highest-inertia cluster
    std::vector<int> counts(static_cast<size_t>(k), 0);
    for (int a : res.assignments) ++counts[static_cast<size_t>(a)];
    for (int e = 0; e < k; ++e) {
      if (counts[static_cast<size_t>(e)] > 0) continue;
      std::vector<double> cluster_cost(static_cast<size_t>(k), 0.0);
      for (int i = 0; i < n; ++i)
        cluster_cost[static_cast<size_t>(res.assignments[static_cast<size_t>(i)])] +=
            point_cost[static_cast<size_t>(i)];
      int donor = 0;
      for (int c = 1; c < k; ++c)
        if (cluster_cost[static_cast<size_t>(c)] > cluster_cost[static_cast<size_t>(donor)])
          donor = c;
      int far = -1;
      for (int i = 0; i < n; ++i)
        if (res.assignments[static_cast<size_t>(i)] == donor &&
            (far < 0 || point_cost[static_cast<size_t>(i)] > point_cost[static_cast<size_t>(far)]))
          far = i;
      if (far < 0) break;  // all costs zero; nothing sensible to split
      inertia -= point_cost[static_cast<size_t>(far)];
      res.assignments[static_cast<size_t>(far)] = e;
      point_cost[static_cast<size_t>(far)] = 0.0;
      --counts[static_cast<size_t>(donor)];
      ++counts[static_cast<size_t>(e)];
      res.centroids[static_cast<size_t>(e)] = points[static_cast<size_t>(far)];
      changed = true;
    }
    res.inertia_history.push_back(inertia);
    res.inertia = inertia;
    if (!changed && iter > 0) break;
    // update step: centroid = mean of members, in point-index order
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<size_t>(c)] > 0)
        res.centroids[static_cast<size_t>(c)].assign(dim, 0.0);
    for (int i = 0; i < n; ++i) {
      auto& cen = res.centroids[static_cast<size_t>(res.assignments[static_cast<size_t>(i)])];
      for (size_t d = 0; d < dim; ++d) cen[d] += points[static_cast<size_t>(i)][d];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<size_t>(c)] > 0)
        for (size_t d = 0; d < dim; ++d)
          res.centroids[static_cast<size_t>(c)][d] /= counts[static_cast<size_t>(c)];
  }
  return res;
}

PseudoLabels make_pseudo_labels(const std::vector<Reaction>& reactions,
                                const ModelConfig& cfg, std::uint64_t seed,
                                int nbits) {
  if (reactions.empty()) fail(ErrorKind::EmptyDataset, "pseudo labels: no reactions");
  std::vector<std::vector<double>> points;
  points.reserve(reactions.size());
  for (const Reaction& rxn : reactions) {
    BitFingerprint fp = drfp(rxn, cfg.radius, nbits);
    std::vector<double> v(static_cast<size_t>(fp.length), 0.0);
    for (int b = 0; b < fp.length; ++b)
      if (fp.test(b)) v[static_cast<size_t>(b)] = 1.0;
    points.push_back(std::move(v));
  }
  PseudoLabels out;
  out.cluster_counts = cfg.pretrain_heads;
  for (size_t h = 0; h < cfg.pretrain_heads.size(); ++h) {
    KMeansResult km = kmeans(points, cfg.pretrain_heads[h], seed + h);
    out.labels.push_back(std::move(km.assignments));
  }
  return out;
}

Value pretrain_loss(const ModelParams& params, const Value& embeddings,
                    const std::vector<std::vector<int>>& labels_per_head) {
  if (params.head_w.empty())
    fail(ErrorKind::InvalidArgument, "pretrain loss: model has no heads");
  if (labels_per_head.size() != params.head_w.size())
    fail(ErrorKind::ShapeMismatch, "pretrain loss: one label list per head");
  Value total;
  for (size_t h = 0; h < params.head_w.size(); ++h) {
    Value logits = add_rowvec(matmul(embeddings, params.head_w[h]), params.head_b[h]);
    Value ce = cross_entropy_logits(logits, labels_per_head[h]);
    total = total ? add(total, ce) : ce;
  }
  return total;
}

namespace {

struct Prepared {
  Featurized feat;
  double label = 0.0;  // standardized for regression, class index otherwise
};

// Graph-only forward pieces built from a cached featurization.
Forward forward_cached(const ModelParams& params, const Featurized& f,
                       bool training, Rng* rng) {
  Value x0 = pool_shingles(params, f.shingles, f.canonical);
  std::vector<Value> p0 = initial_bias_values(params, f.pf);
  return forward(params, x0, p0, training, rng);
}

[[noreturn]] void nonfinite(const char* where, int epoch, const std::string& detail) {
  fail(ErrorKind::NonFiniteLoss, std::string(where) + " produced a non-finite value at epoch " +
                                      std::to_string(epoch) + ": " + detail);
}

}  // namespace

PretrainResult pretrain(ModelParams params,
                        const std::vector<Reaction>& reactions,
                        const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (params.config.task != Task::Pretrain)
    fail(ErrorKind::InvalidArgument, "pretrain: model task must be pretrain");
  if (reactions.empty()) fail(ErrorKind::EmptyDataset, "pretrain: no reactions");
  const Precision saved = precision();
  set_precision(params.config.compute);
  params.config.dropout = cfg.dropout;
  PretrainResult res;
  res.pseudo = make_pseudo_labels(reactions, params.config, cfg.seed);
  std::vector<Featurized> feats;
  feats.reserve(reactions.size());
  for (const Reaction& rxn : reactions) feats.push_back(featurize(rxn, params.config));
  const int n = static_cast<int>(reactions.size());
  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const int total_steps = cfg.epochs * steps_per_epoch;
  std::vector<Value> trainable = params.trainable();
  Adam adam(trainable);
  Rng rng(cfg.seed);
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = rng.permutation(n);
    double epoch_loss = 0.0;
    for (int b = 0; b < steps_per_epoch; ++b) {
      const int lo = b * cfg.batch_size;
      const int hi = std::min(n, lo + cfg.batch_size);
      Value emb;
      std::vector<std::vector<int>> batch_labels(res.pseudo.labels.size());
      try {
        for (int i = lo; i < hi; ++i) {
          const int idx = order[static_cast<size_t>(i)];
          Forward f = forward_cached(params, feats[static_cast<size_t>(idx)], true, &rng);
          emb = emb ? concat_rows(emb, f.reaction_embedding) : f.reaction_embedding;
          for (size_t h = 0; h < batch_labels.size(); ++h)
            batch_labels[h].push_back(res.pseudo.labels[h][static_cast<size_t>(idx)]);
        }
        Value loss = pretrain_loss(params, emb, batch_labels);
        if (!std::isfinite(loss->scalar())) nonfinite("pretrain loss", epoch, "");
        epoch_loss += loss->scalar() * (hi - lo);
        zero_grads(trainable);
        backward(loss);
      } catch (const Error& e) {
        set_precision(saved);
        if (e.kind() == ErrorKind::NonFiniteValue)
          nonfinite("pretrain forward", epoch, e.what());
        throw;
      }
      adam.step(trainable, lr_at(cfg, step, total_steps));
      ++step;
    }
    res.epoch_losses.push_back(epoch_loss / n);
  }
  set_precision(saved);
  res.params = std::move(params);
  return res;
}

std::map<std::string, double> regression_metrics(
    const std::vector<double>& preds, const std::vector<double>& labels) {
  if (preds.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "metrics: prediction/label count mismatch");
  if (preds.size() < 2)
    fail(ErrorKind::LengthMismatch, "metrics: R2 needs at least 2 points");
  const double n = static_cast<double>(preds.size());
  double abs_sum = 0.0, sq_sum = 0.0, label_sum = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - labels[i];
    abs_sum += std::fabs(d);
    sq_sum += d * d;
    label_sum += labels[i];
  }
  const double mean = label_sum / n;
  double ss_tot = 0.0;
  for (double y : labels) ss_tot += (y - mean) * (y - mean);
  double r2;
  if (ss_tot == 0.0)
    r2 = sq_sum == 0.0 ? 1.0 : 0.0;  // constant labels
  else
    r2 = 1.0 - sq_sum / ss_tot;
  return {{"MAE", abs_sum / n}, {"RMSE", std::sqrt(sq_sum / n)}, {"R2", r2}};
}

std::map<std::string, double> classification_metrics(
    const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "metrics: prediction/label count mismatch");
  if (preds.empty()) fail(ErrorKind::LengthMismatch, "metrics: empty inputs");
  int k = 2;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || labels[i] < 0)
      fail(ErrorKind::LabelOutOfRange, "metrics: negative class index");
    k = std::max({k, preds[i] + 1, labels[i] + 1});
  }
  const size_t kk = static_cast<size_t>(k);
  std::vector<double> conf(kk * kk, 0.0);  // rows true, cols predicted
  for (size_t i = 0; i < preds.size(); ++i)
    conf[static_cast<size_t>(labels[i]) * kk + static_cast<size_t>(preds[i])] += 1.0;
  const double total = static_cast<double>(preds.size());
  double correct = 0.0;
  for (size_t c = 0; c < kk; ++c) correct += conf[c * kk + c];
  const double acc = correct / total;

  // multiclass MCC (the R_K statistic)
  std::vector<double> true_count(kk, 0.0), pred_count(kk, 0.0);
  for (size_t t = 0; t < kk; ++t)
    for (size_t p = 0; p < kk; ++p) {
      true_count[t] += conf[t * kk + p];
      pred_count[p] += conf[t * kk + p];
    }
  double dot_tp = 0.0, sum_t2 = 0.0, sum_p2 = 0.0;
  for (size_t c = 0; c < kk; ++c) {
    dot_tp += true_count[c] * pred_count[c];
    sum_t2 += true_count[c] * true_count[c];
    sum_p2 += pred_count[c] * pred_count[c];
  }
  const double mcc_num = correct * total - dot_tp;
  const double mcc_den =
      std::sqrt((total * total - sum_p2) * (total * total - sum_t2));
  const double mcc = mcc_den == 0.0 ? 0.0 : mcc_num / mcc_den;

  // Confusion entropy (CEN) after Wei et al. 2010. Misclassification
  // probabilities are taken with respect to each class's row+column mass,
  // entropies use log base 2(K-1), which is plain base 2 when K = 2.
  const double base = k == 2 ? 2.0 : 2.0 * (k - 1);
  const double log_base = std::log(base);
  auto ent = [&](double p) { return p > 0.0 ? -p * std::log(p) / log_base : 0.0; };
  std::vector<double> mass(kk, 0.0);
  for (size_t j = 0; j < kk; ++j) {
    for (size_t l = 0; l < kk; ++l) mass[j] += conf[j * kk + l] + conf[l * kk + j];
  }
  double cen = 0.0;
  for (size_t j = 0; j < kk; ++j) {
    if (mass[j] == 0.0) continue;
    double cen_j = 0.0;
    for (size_t l = 0; l < kk; ++l) {
      if (l == j) continue;
      cen_j += ent(conf[j * kk + l] / mass[j]);  // true j predicted l
      cen_j += ent(conf[l * kk + j] / mass[j]);  // true l predicted j
    }
    cen += mass[j] / (2.0 * total) * cen_j;
  }
  return {{"ACC", acc}, {"MCC", mcc}, {"CEN", cen}};
}

namespace {

std::map<std::string, double> eval_metrics(const ModelParams& params,
                                           const std::vector<Prepared>& data) {
  if (params.config.task == Task::Classification) {
    std::vector<int> preds, labels;
    for (const Prepared& p : data) {
      Forward f = forward_cached(params, p.feat, false, nullptr);
      int best = 0;
      for (int c = 1; c < f.prediction->cols; ++c)
        if (f.prediction->at(0, c) > f.prediction->at(0, best)) best = c;
      preds.push_back(best);
      labels.push_back(static_cast<int>(p.label));
    }
    return classification_metrics(preds, labels);
  }
  std::vector<double> preds, labels;
  for (const Prepared& p : data) {
    Forward f = forward_cached(params, p.feat, false, nullptr);
    preds.push_back(f.prediction->at(0, 0) * params.label_std + params.label_mean);
    labels.push_back(p.label * params.label_std + params.label_mean);
  }
  return regression_metrics(preds, labels);
}

std::vector<Prepared> prepare(const std::vector<LabeledReaction>& rows,
                              const ModelParams& params, const char* which) {
  std::vector<Prepared> out;
  out.reserve(rows.size());
  for (const LabeledReaction& lr : rows) {
    if (!lr.label.has_value())
      fail(ErrorKind::InvalidArgument,
           std::string(which) + " row without a label: " + lr.reaction.id);
    Prepared p;
    p.feat = featurize(lr.reaction, params.config);
    p.label = *lr.label;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

FinetuneResult finetune(ModelParams params, const DatasetSplit& split,
                        const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (params.config.task == Task::Pretrain)
    fail(ErrorKind::InvalidArgument, "finetune: model task must be regression or classification");
  if (cfg.task != params.config.task)
    fail(ErrorKind::InvalidArgument, "finetune: train task does not match model task");
  if (split.train.empty()) fail(ErrorKind::EmptyDataset, "finetune: empty train split");
  if (split.test.empty()) fail(ErrorKind::EmptyDataset, "finetune: empty test split");
  const Precision saved = precision();
  set_precision(params.config.compute);
  params.config.dropout = cfg.dropout;

  std::vector<Prepared> train = prepare(split.train, params, "train");
  std::vector<Prepared> test = prepare(split.test, params, "test");

  const bool classify = params.config.task == Task::Classification;
  if (classify) {
    for (const Prepared& p : train)
      if (p.label < 0 || p.label >= params.config.num_classes ||
          p.label != std::floor(p.label))
        fail(ErrorKind::LabelOutOfRange, "finetune: bad class label");
    params.label_mean = 0.0;
    params.label_std = 1.0;
  } else {
    // standardize labels with train statistics
    double mean = 0.0;
    for (const Prepared& p : train) mean += p.label;
    mean /= static_cast<double>(train.size());
    double var = 0.0;
    for (const Prepared& p : train) var += (p.label - mean) * (p.label - mean);
    double sd = std::sqrt(var / static_cast<double>(train.size()));
    if (sd < 1e-12) sd = 1.0;  // constant labels; leave them centered only
    params.label_mean = mean;
    params.label_std = sd;
    for (Prepared& p : train) p.label = (p.label - mean) / sd;
    for (Prepared& p : test) p.label = (p.label - mean) / sd;
  }

  FinetuneResult res;
  const int n = static_cast<int>(train.size());
  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const int total_steps = cfg.epochs * steps_per_epoch;
  std::vector<Value> trainable = params.trainable();
  Adam adam(trainable);
  Rng rng(cfg.seed);
  double best_score = 0.0;
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = rng.permutation(n);
    double epoch_loss = 0.0;
    for (int b = 0; b < steps_per_epoch; ++b) {
      const int lo = b * cfg.batch_size;
      const int hi = std::min(n, lo + cfg.batch_size);
      try {
        Value loss;
        if (classify) {
          Value logits;
          std::vector<int> labels;
          for (int i = lo; i < hi; ++i) {
            const Prepared& p = train[static_cast<size_t>(order[static_cast<size_t>(i)])];
            Forward f = forward_cached(params, p.feat, true, &rng);
            logits = logits ? concat_rows(logits, f.prediction) : f.prediction;
            labels.push_back(static_cast<int>(p.label));
          }
          loss = cross_entropy_logits(logits, labels);
        } else {
          Value preds;
          std::vector<double> labels;
          for (int i = lo; i < hi; ++i) {
            const Prepared& p = train[static_cast<size_t>(order[static_cast<size_t>(i)])];
            Forward f = forward_cached(params, p.feat, true, &rng);
            preds = preds ? concat_rows(preds, f.prediction) : f.prediction;
            labels.push_back(p.label);
          }
          Value diff = sub(preds, constant(hi - lo, 1, std::move(labels)));
          loss = scale(sum_all(square(diff)), 1.0 / (hi - lo));
        }
        if (!std::isfinite(loss->scalar())) nonfinite("train loss", epoch, "");
        epoch_loss += loss->scalar() * (hi - lo);
        zero_grads(trainable);
        backward(loss);
      } catch (const Error& e) {
        set_precision(saved);
        if (e.kind() == ErrorKind::NonFiniteValue)
          nonfinite("train forward", epoch, e.what());
        throw;
      }
      adam.step(trainable, lr_at(cfg, step, total_steps));
      ++step;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / n;
    stats.test_metrics = eval_metrics(params, test);
    const double score =
        classify ? stats.test_metrics.at("ACC") : -stats.test_metrics.at("RMSE");
    if (res.best_epoch < 0 || score > best_score) {
      best_score = score;
      res.best_epoch = epoch;
      res.best = clone_params(params);
    }
    res.history.push_back(std::move(stats));
  }
  if (res.best_epoch < 0) res.best = clone_params(params);  // zero epochs
  res.last = std::move(params);
  res.best_test_metrics = eval_metrics(res.best, test);
  res.final_train_metrics = eval_metrics(res.last, train);
  res.final_test_metrics = eval_metrics(res.last, test);
  set_precision(saved);
  return res;
}

std::pair<std::vector<double>, std::vector<double>> predict_all(
    const ModelParams& params, const std::vector<LabeledReaction>& data) {
  std::vector<double> preds, labels;
  for (const LabeledReaction& lr : data) {
    if (!lr.label.has_value()) continue;
    preds.push_back(predict_value(params, lr.reaction));
    labels.push_back(*lr.label);
  }
  return {std::move(preds), std::move(labels)};
}

Reaction permute_reaction(const Reaction& rxn, Rng& rng) {
  Reaction out;
  out.id = rxn.id;
  auto scramble = [&rng](const std::vector<Conformer>& in,
                         std::vector<Conformer>& dst) {
    std::vector<int> order = rng.permutation(static_cast<int>(in.size()));
    for (int idx : order) {
      const Conformer& mol = in[static_cast<size_t>(idx)];
      const int n = mol.graph.atom_count();
      std::vector<int> perm = rng.permutation(n);  // new index of old atom i
      Conformer c;
      c.graph = relabel(mol.graph, perm);
      if (mol.has_coords()) {
        c.coords.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
          c.coords[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
              mol.coords[static_cast<size_t>(i)];
      }
      dst.push_back(std::move(c));
    }
  };
  scramble(rxn.reactants, out.reactants);
  scramble(rxn.products, out.products);
  return out;
}

PermutationReport permutation_test(
    const std::function<double(const Reaction&)>& predict,
    const std::vector<Reaction>& reactions, int n_perms, std::uint64_t seed) {
  if (n_perms < 2)
    fail(ErrorKind::InvalidArgument, "permutation test: n_perms must be >= 2");
  PermutationReport rep;
  rep.n_perms = n_perms;
  Rng rng(seed);
  for (const Reaction& rxn : reactions) {
    std::vector<double> preds;
    preds.reserve(static_cast<size_t>(n_perms));
    for (int v = 0; v < n_perms; ++v) preds.push_back(predict(permute_reaction(rxn, rng)));
    bool all_same = true;
    for (double p : preds)
      if (p != preds[0]) all_same = false;
    double sd = 0.0;
    if (!all_same) {
      double mean = 0.0;
      for (double p : preds) mean += p;
      mean /= n_perms;
      double var = 0.0;
      for (double p : preds) var += (p - mean) * (p - mean);
      sd = std::sqrt(var / n_perms);
    }
    rep.stds.push_back(sd);
  }
  rep.max_std = 0.0;
  double total = 0.0;
  for (double s : rep.stds) {
    rep.max_std = std::max(rep.max_std, s);
    total += s;
  }
  rep.mean_std = rep.stds.empty() ? 0.0 : total / static_cast<double>(rep.stds.size());
  return rep;
}

double order_sensitive_prediction(const Reaction& rxn) {
  // Depends on raw molecule order and atom numbering on purpose: a harness
  // self-test predictor that any real model must beat.
  double acc = 0.0;
  int pos = 1;
  for (const auto* side : {&rxn.reactants, &rxn.products}) {
    for (const Conformer& mol : *side) {
      const std::uint64_t h = fnv1a64(write_smiles(mol.graph));
      acc += static_cast<double>(h % 100003) / 100003.0 * pos;
      ++pos;
    }
  }
  return acc;
}

}  // namespace rxnshingle
