// Python bindings for the main operations: canonicalization, shingles,
// fingerprints, and model inference.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "rxnshingle/error.hpp"
#include "rxnshingle/fingerprint.hpp"
#include "rxnshingle/model.hpp"
#include "rxnshingle/mol.hpp"
#include "rxnshingle/shingles.hpp"
#include "rxnshingle/smiles.hpp"
#include "rxnshingle/train.hpp"
#include "rxnshingle/version.hpp"

namespace py = pybind11;
using namespace rxnshingle;

namespace {

Reaction reaction_from_smiles(const std::string& text, const std::string& id = "") {
  ReactionGraphs g = parse_reaction_smiles(text);
  Reaction rxn;
  rxn.id = id;
  for (auto& m : g.reactants) rxn.reactants.push_back({std::move(m), {}});
  for (auto& m : g.products) rxn.products.push_back({std::move(m), {}});
  return rxn;
}

std::string canon_fragments(const std::string& text) {
  std::vector<MolGraph> mols = parse_smiles(text);
  std::vector<std::string> parts;
  parts.reserve(mols.size());
  for (const MolGraph& m : mols) parts.push_back(canonical_smiles(m));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '.';
    out += parts[i];
  }
  return out;
}

std::string canon_reaction(const std::string& text) {
  Reaction rxn = reaction_from_smiles(text);
  Reaction canon = canonical_reaction(rxn);
  auto join = [](const std::vector<Conformer>& side) {
    std::string out;
    for (size_t i = 0; i < side.size(); ++i) {
      if (i) out += '.';
      out += write_smiles(side[i].graph);
    }
    return out;
  };
  return join(canon.reactants) + ">>" + join(canon.products);
}

ShingleMode mode_from_name(const std::string& name) {
  if (name == "symdiff") return ShingleMode::SymDiff;
  if (name == "union") return ShingleMode::Union;
  if (name == "reactants") return ShingleMode::ReactantsOnly;
  fail(ErrorKind::InvalidArgument, "unknown shingle mode: " + name);
}

std::vector<std::string> shingle_keys(const std::string& text, int r_max,
                                      const std::string& mode) {
  Reaction canon = canonical_reaction(reaction_from_smiles(text));
  ShingleSet set;
  switch (mode_from_name(mode)) {
    case ShingleMode::SymDiff:
      set = symmetric_difference(canon.reactants, canon.products, r_max);
      break;
    case ShingleMode::Union:
      set = union_shingles(canon.reactants, canon.products, r_max);
      break;
    case ShingleMode::ReactantsOnly:
      set = reactant_only_shingles(canon.reactants, r_max);
      break;
  }
  std::vector<std::string> keys;
  keys.reserve(set.shingles.size());
  for (const auto& s : set.shingles) keys.push_back(s.key);
  return keys;
}

std::string drfp_hex(const std::string& text, int r_max, int nbits) {
  return fingerprint_hex(drfp(reaction_from_smiles(text), r_max, nbits));
}

double tanimoto_hex(const std::string& a, const std::string& b) {
  return tanimoto(fingerprint_from_hex(a), fingerprint_from_hex(b));
}

// Thin inference wrapper around a parameter set.
class Model {
 public:
  static Model from_checkpoint(const std::string& path) {
    return Model(load_checkpoint(path));
  }
  static Model fresh(const std::string& profile, std::uint64_t seed) {
    ModelConfig cfg;
    if (profile == "desk")
      cfg = ModelConfig::desk();
    else if (profile != "paper")
      fail(ErrorKind::InvalidArgument, "unknown profile: " + profile);
    return Model(init_params(cfg, seed));
  }

  double predict(const std::string& rxn_smiles) const {
    return predict_value(params_, reaction_from_smiles(rxn_smiles));
  }

  std::vector<double> predict_many(const std::vector<std::string>& rxns) const {
    std::vector<double> out;
    out.reserve(rxns.size());
    for (const auto& r : rxns) out.push_back(predict(r));
    return out;
  }

  // Std of the prediction over molecule-order / atom-label permutations.
  double permutation_std(const std::string& rxn_smiles, int n_perms,
                         std::uint64_t seed) const {
    std::vector<Reaction> one{reaction_from_smiles(rxn_smiles)};
    PermutationReport rep = permutation_test(
        [this](const Reaction& r) { return predict_value(params_, r); }, one,
        n_perms, seed);
    return rep.max_std;
  }

  void save(const std::string& path) const { save_checkpoint(path, params_); }

  std::string config_json() const { return config_to_json(params_.config); }

 private:
  explicit Model(ModelParams params) : params_(std::move(params)) {}
  ModelParams params_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Reaction shingle featurization and prediction";
  m.attr("__version__") = kVersion;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string text = std::string(e.kind_name()) + ": " + e.what();
      PyErr_SetString(PyExc_ValueError, text.c_str());
    }
  });

  m.def("canonical_smiles", &canon_fragments, py::arg("smiles"),
        "Canonical SMILES; dot-separated fragments are canonicalized and sorted.");
  m.def("canonical_reaction_smiles", &canon_reaction, py::arg("rxn_smiles"),
        "Reaction SMILES with every molecule canonicalized and each side sorted.");
  m.def("shingle_keys", &shingle_keys, py::arg("rxn_smiles"), py::arg("r_max") = 3,
        py::arg("mode") = "symdiff",
        "Shingle keys of the reaction, in canonical order (capped set). "
        "Modes: symdiff, union, reactants.");
  m.def("drfp_hex", &drfp_hex, py::arg("rxn_smiles"), py::arg("r_max") = 3,
        py::arg("nbits") = 1024,
        "Differential reaction fingerprint as lowercase hex.");
  m.def("tanimoto_hex", &tanimoto_hex, py::arg("a"), py::arg("b"),
        "Tanimoto similarity of two hex fingerprints.");

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::from_checkpoint, py::arg("path"),
                  "Load a model checkpoint.")
      .def_static("fresh", &Model::fresh, py::arg("profile") = "desk",
                  py::arg("seed") = 0, "Freshly initialized model (desk or paper).")
      .def("predict", &Model::predict, py::arg("rxn_smiles"))
      .def("predict_many", &Model::predict_many, py::arg("rxn_smiles_list"))
      .def("permutation_std", &Model::permutation_std, py::arg("rxn_smiles"),
           py::arg("n_perms") = 10, py::arg("seed") = 0)
      .def("save", &Model::save, py::arg("path"))
      .def("config_json", &Model::config_json);
}
