// Command-line front end for the reaction shingle toolkit.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rxnshingle/error.hpp"
#include "rxnshingle/fingerprint.hpp"
#include "rxnshingle/io.hpp"
#include "rxnshingle/model.hpp"
#include "rxnshingle/smiles.hpp"
#include "rxnshingle/train.hpp"

using namespace rxnshingle;
using nlohmann::json;

namespace {

// Shared config file layout: {"model": {...}, "train": {...}}; either key may
// be missing, and a bare model config object is accepted too.
struct FileConfig {
  ModelConfig model;
  TrainConfig train;
  double test_fraction = 0.3;
};

FileConfig read_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("config file: ") + e.what());
  }
  FileConfig out;
  if (j.contains("model") || j.contains("train")) {
    // catch misplaced keys ("profile" belongs inside "model") instead of
    // silently training with defaults
    for (const auto& [key, value] : j.items())
      if (key != "model" && key != "train" && key != "test_fraction")
        fail(ErrorKind::InvalidArgument,
             "config: unknown top-level key \"" + key +
                 "\" (expected model, train, test_fraction)");
    if (j.contains("model")) out.model = config_from_json(j.at("model").dump());
    if (j.contains("train"))
      out.train = train_config_from_json(j.at("train").dump());
    if (j.contains("test_fraction"))
      out.test_fraction = j.at("test_fraction").get<double>();
  } else {
    out.model = config_from_json(j.dump());
  }
  return out;
}

json metrics_json(const std::map<std::string, double>& m) {
  json j;
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

std::vector<Reaction> reactions_of(const Dataset& ds) {
  std::vector<Reaction> out;
  out.reserve(ds.rows.size());
  for (const auto& lr : ds.rows) out.push_back(lr.reaction);
  return out;
}

json issues_json(const Dataset& ds) {
  json arr = json::array();
  for (const RowIssue& issue : ds.issues) {
    json j;
    j["message"] = issue.message;
    j["row"] = issue.row;
    arr.push_back(j);
  }
  return arr;
}

// Move tensors with matching name and shape from a donor checkpoint into
// freshly initialized params (pretraining -> finetuning handoff).
int transplant(const ModelParams& donor, ModelParams& target) {
  std::map<std::string, Value> have;
  for (auto& [name, v] : donor.named()) have[name] = v;
  int copied = 0;
  for (auto& [name, v] : target.named()) {
    auto it = have.find(name);
    if (it == have.end()) continue;
    if (it->second->rows != v->rows || it->second->cols != v->cols) continue;
    v->value = it->second->value;
    ++copied;
  }
  return copied;
}

int run(int argc, char** argv) {
  CLI::App app{"reaction shingle featurization and prediction"};
  app.require_subcommand(1);

  // canon
  std::string canon_smiles_text;
  auto* canon_cmd = app.add_subcommand("canon", "canonicalize a SMILES string");
  canon_cmd->add_option("smiles", canon_smiles_text, "input SMILES")->required();

  // shingles
  std::string sh_rxn, sh_mode = "symdiff";
  int sh_radius = 3;
  auto* sh_cmd = app.add_subcommand("shingles", "print reaction shingle keys");
  sh_cmd->add_option("--rxn", sh_rxn, "reaction SMILES")->required();
  sh_cmd->add_option("--radius", sh_radius, "maximum shingle radius")->required();
  sh_cmd->add_option("--mode", sh_mode, "symdiff|union|reactants");

  // drfp
  std::string fp_in, fp_out;
  int fp_bits = 1024;
  auto* fp_cmd = app.add_subcommand("drfp", "fingerprint a dataset");
  fp_cmd->add_option("--in", fp_in, "dataset file (csv or jsonl)")->required();
  fp_cmd->add_option("--out", fp_out, "output file, one hex row per reaction")
      ->required();
  fp_cmd->add_option("--bits", fp_bits, "fingerprint length");

  // cluster
  std::string cl_in, cl_out;
  int cl_k = 0;
  std::uint64_t cl_seed = 0;
  auto* cl_cmd = app.add_subcommand("cluster", "k-means over fingerprints");
  cl_cmd->add_option("--in", cl_in, "hex fingerprint file")->required();
  cl_cmd->add_option("--k", cl_k, "number of clusters")->required();
  cl_cmd->add_option("--seed", cl_seed, "rng seed")->required();
  cl_cmd->add_option("--out", cl_out, "label output file")->required();

  // pretrain
  std::string pre_data, pre_coords, pre_config, pre_out;
  auto* pre_cmd = app.add_subcommand("pretrain", "pseudo-label pretraining");
  pre_cmd->add_option("--data", pre_data, "dataset file")->required();
  pre_cmd->add_option("--coords", pre_coords, "coordinate file (optional)");
  pre_cmd->add_option("--config", pre_config, "config json file")->required();
  pre_cmd->add_option("--out", pre_out, "checkpoint output")->required();

  // train
  std::string tr_data, tr_split = "random", tr_pivot, tr_config, tr_init,
              tr_out, tr_report;
  auto* tr_cmd = app.add_subcommand("train", "fine-tune on labeled reactions");
  tr_cmd->add_option("--data", tr_data, "dataset file")->required();
  tr_cmd->add_option("--split", tr_split, "random|pivot")->required();
  tr_cmd->add_option("--pivot-file", tr_pivot, "pivot SMILES file");
  tr_cmd->add_option("--config", tr_config, "config json file")->required();
  tr_cmd->add_option("--init", tr_init, "initial checkpoint (optional)");
  tr_cmd->add_option("--out", tr_out, "checkpoint output")->required();
  tr_cmd->add_option("--report", tr_report, "metric report output")->required();

  // predict
  std::string pd_model, pd_data, pd_out;
  auto* pd_cmd = app.add_subcommand("predict", "predict labels for a dataset");
  pd_cmd->add_option("--model", pd_model, "checkpoint file")->required();
  pd_cmd->add_option("--data", pd_data, "dataset file")->required();
  pd_cmd->add_option("--out", pd_out, "csv output")->required();

  // permtest
  std::string pt_model, pt_data, pt_report;
  int pt_n = 5;
  std::uint64_t pt_seed = 0;
  auto* pt_cmd = app.add_subcommand("permtest", "permutation invariance test");
  pt_cmd->add_option("--model", pt_model, "checkpoint file")->required();
  pt_cmd->add_option("--data", pt_data, "dataset file")->required();
  pt_cmd->add_option("--n", pt_n, "variants per reaction");
  pt_cmd->add_option("--seed", pt_seed, "rng seed");
  pt_cmd->add_option("--report", pt_report, "report output")->required();

  CLI11_PARSE(app, argc, argv);

  if (canon_cmd->parsed()) {
    std::vector<MolGraph> mols = parse_smiles(canon_smiles_text);
    std::vector<std::string> parts;
    parts.reserve(mols.size());
    for (const MolGraph& m : mols) parts.push_back(canonical_smiles(m));
    std::sort(parts.begin(), parts.end());
    std::string joined;
    for (size_t i = 0; i < parts.size(); ++i) {
      if (i) joined += '.';
      joined += parts[i];
    }
    std::cout << joined << "\n";
    return 0;
  }

  if (sh_cmd->parsed()) {
    ReactionGraphs graphs = parse_reaction_smiles(sh_rxn);
    Reaction rxn;
    for (auto& g : graphs.reactants) rxn.reactants.push_back({std::move(g), {}});
    for (auto& g : graphs.products) rxn.products.push_back({std::move(g), {}});
    Reaction canon = canonical_reaction(rxn);
    ShingleSet set;
    if (sh_mode == "symdiff")
      set = symmetric_difference(canon.reactants, canon.products, sh_radius);
    else if (sh_mode == "union")
      set = union_shingles(canon.reactants, canon.products, sh_radius);
    else if (sh_mode == "reactants")
      set = reactant_only_shingles(canon.reactants, sh_radius);
    else
      fail(ErrorKind::InvalidArgument, "unknown mode: " + sh_mode);
    if (set.empty())
      std::cerr << "warning: empty shingle set\n";
    for (const Shingle& s : set.shingles) std::cout << s.key << "\n";
    return 0;
  }

  if (fp_cmd->parsed()) {
    Dataset ds = load_dataset(fp_in);
    std::string out;
    for (const auto& lr : ds.rows)
      out += fingerprint_hex(drfp(lr.reaction, 3, fp_bits)) + "\n";
    write_file_atomic(fp_out, out);
    for (const RowIssue& issue : ds.issues)
      std::cerr << "warning: row " << issue.row << " skipped: " << issue.message
                << "\n";
    return 0;
  }

  if (cl_cmd->parsed()) {
    std::istringstream in(read_file(cl_in));
    std::vector<std::vector<double>> points;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      BitFingerprint fp = fingerprint_from_hex(line);
      std::vector<double> v(static_cast<size_t>(fp.length), 0.0);
      for (int b = 0; b < fp.length; ++b)
        if (fp.test(b)) v[static_cast<size_t>(b)] = 1.0;
      points.push_back(std::move(v));
    }
    KMeansResult km = kmeans(points, cl_k, cl_seed);
    std::string out;
    for (int a : km.assignments) out += std::to_string(a) + "\n";
    write_file_atomic(cl_out, out);
    return 0;
  }

  if (pre_cmd->parsed()) {
    FileConfig cfg = read_config(pre_config);
    cfg.model.task = Task::Pretrain;
    cfg.train.task = Task::Pretrain;
    Dataset ds = load_dataset(pre_data);
    if (!pre_coords.empty()) load_coords(pre_coords, ds.rows);
    if (ds.rows.empty()) fail(ErrorKind::EmptyDataset, "no usable rows");
    ModelParams params = init_params(cfg.model, cfg.train.seed);
    PretrainResult res = pretrain(std::move(params), reactions_of(ds), cfg.train);
    save_checkpoint(pre_out, res.params);
    json report;
    report["epoch_losses"] = res.epoch_losses;
    report["rows"] = ds.rows.size();
    std::cout << report.dump() << "\n";
    return 0;
  }

  if (tr_cmd->parsed()) {
    FileConfig cfg = read_config(tr_config);
    if (cfg.model.task == Task::Pretrain)
      fail(ErrorKind::InvalidArgument, "train: use the pretrain subcommand");
    cfg.train.task = cfg.model.task;
    Dataset ds = load_dataset(tr_data);
    if (ds.rows.empty()) fail(ErrorKind::EmptyDataset, "no usable rows");
    DatasetSplit split;
    if (tr_split == "random") {
      split = split_random(ds.rows, cfg.test_fraction, cfg.train.seed);
    } else if (tr_split == "pivot") {
      if (tr_pivot.empty())
        fail(ErrorKind::InvalidArgument, "pivot split needs --pivot-file");
      std::vector<std::string> pivots;
      std::istringstream in(read_file(tr_pivot));
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) pivots.push_back(line);
      split = split_by_pivot(ds.rows, pivots);
    } else {
      fail(ErrorKind::InvalidArgument, "unknown split: " + tr_split);
    }
    ModelParams params = init_params(cfg.model, cfg.train.seed);
    int transferred = 0;
    if (!tr_init.empty()) {
      ModelParams donor = load_checkpoint(tr_init);
      transferred = transplant(donor, params);
    }
    FinetuneResult res = finetune(std::move(params), split, cfg.train);
    save_checkpoint(tr_out, res.best);
    json report;
    report["best_epoch"] = res.best_epoch;
    report["best_test_metrics"] = metrics_json(res.best_test_metrics);
    report["config"] = json::parse(config_to_json(cfg.model));
    report["data"] = tr_data;
    report["final_test_metrics"] = metrics_json(res.final_test_metrics);
    report["final_train_metrics"] = metrics_json(res.final_train_metrics);
    json hist = json::array();
    for (const EpochStats& e : res.history) {
      json h;
      h["epoch"] = e.epoch;
      h["test_metrics"] = metrics_json(e.test_metrics);
      h["train_loss"] = e.train_loss;
      hist.push_back(h);
    }
    report["history"] = hist;
    report["issues"] = issues_json(ds);
    // The CEN metric follows Wei et al. 2010 (confusion entropy, log base
    // 2(K-1), plain base 2 for binary); recorded here for reproducibility.
    report["metric_definitions"] = {{"CEN", "Wei et al. 2010, base 2(K-1)"}};
    report["split"] = {{"kind", tr_split},
                       {"test", split.test.size()},
                       {"train", split.train.size()}};
    report["train_config"] = json::parse(train_config_to_json(cfg.train));
    report["transferred_tensors"] = transferred;
    report["version"] = version_string();
    write_file_atomic(tr_report, report.dump(2) + "\n");
    return 0;
  }

  if (pd_cmd->parsed()) {
    ModelParams params = load_checkpoint(pd_model);
    Dataset ds = load_dataset(pd_data);
    std::string out = "id,prediction\n";
    for (const auto& lr : ds.rows) {
      out += csv_field(lr.reaction.id) + ",";
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", predict_value(params, lr.reaction));
      out += buf;
      out += "\n";
    }
    write_file_atomic(pd_out, out);
    return 0;
  }

  if (pt_cmd->parsed()) {
    ModelParams params = load_checkpoint(pt_model);
    Dataset ds = load_dataset(pt_data);
    if (ds.rows.empty()) fail(ErrorKind::EmptyDataset, "no usable rows");
    auto predictor = [&params](const Reaction& r) {
      return predict_value(params, r);
    };
    PermutationReport rep =
        permutation_test(predictor, reactions_of(ds), pt_n, pt_seed);
    json report;
    report["all_invariant"] = rep.max_std == 0.0;
    report["config"] = json::parse(config_to_json(params.config));
    report["max_std"] = rep.max_std;
    report["mean_std"] = rep.mean_std;
    report["n_perms"] = rep.n_perms;
    report["n_reactions"] = rep.stds.size();
    report["seed"] = pt_seed;
    report["stds"] = rep.stds;
    report["version"] = version_string();
    write_file_atomic(pt_report, report.dump(2) + "\n");
    std::cout << "max std " << rep.max_std << " over " << rep.stds.size()
              << " reactions\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    json err;
    err["error"] = {{"kind", e.kind_name()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"kind", "Internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }
}
