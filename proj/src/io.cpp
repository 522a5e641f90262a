#include "rxnshingle/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rxnshingle/error.hpp"
#include "rxnshingle/smiles.hpp"
#include "rxnshingle/version.hpp"

namespace rxnshingle {

using nlohmann::json;

std::string version_string() { return kVersion; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::IoError, "read failed for " + path);
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorKind::IoError, "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    fail(ErrorKind::IoError,
         "rename failed for " + path + ": " + std::strerror(errno));
  }
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  size_t i = 0;
  const size_t n = text.size();
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
    row_started = false;
  };
  while (i < n) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty())
          fail(ErrorKind::ParseError, "csv: quote inside unquoted field");
        quoted = true;
        row_started = true;
        ++i;
        break;
      case ',':
        end_field();
        row_started = true;
        ++i;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        ++i;
        break;
      default:
        field += c;
        row_started = true;
        ++i;
        break;
    }
  }
  if (quoted) fail(ErrorKind::ParseError, "csv: unterminated quoted field");
  if (row_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_field(const std::string& field) {
  bool need_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!need_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

Reaction parse_rxn_field(const std::string& rxn_smiles, const std::string& id) {
  ReactionGraphs graphs = parse_reaction_smiles(rxn_smiles);
  Reaction rxn;
  rxn.id = id;
  for (auto& g : graphs.reactants) rxn.reactants.push_back({std::move(g), {}});
  for (auto& g : graphs.products) rxn.products.push_back({std::move(g), {}});
  return rxn;
}

std::optional<double> parse_label_field(const std::string& text) {
  if (text.empty()) return std::nullopt;
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {  // stod throws its own exception types
    fail(ErrorKind::ParseError, "bad label value: " + text);
  }
  while (pos < text.size() &&
         (text[pos] == ' ' || text[pos] == '\t'))
    ++pos;
  if (pos != text.size())
    fail(ErrorKind::ParseError, "bad label value: " + text);
  return v;
}

Dataset load_csv(const std::string& path, bool strict) {
  auto rows = parse_csv(read_file(path));
  if (rows.empty()) fail(ErrorKind::EmptyDataset, "no rows in " + path);
  int id_col = -1, rxn_col = -1, label_col = -1;
  const auto& header = rows[0];
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "id") id_col = static_cast<int>(c);
    if (header[c] == "rxn") rxn_col = static_cast<int>(c);
    if (header[c] == "label") label_col = static_cast<int>(c);
  }
  if (id_col < 0) fail(ErrorKind::MissingColumn, "csv is missing column: id");
  if (rxn_col < 0) fail(ErrorKind::MissingColumn, "csv is missing column: rxn");
  if (label_col < 0)
    fail(ErrorKind::MissingColumn, "csv is missing column: label");
  Dataset ds;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
    try {
      if (static_cast<int>(row.size()) <=
          std::max(id_col, std::max(rxn_col, label_col)))
        fail(ErrorKind::ParseError, "row has too few fields");
      LabeledReaction lr;
      lr.reaction =
          parse_rxn_field(row[static_cast<size_t>(rxn_col)],
                          row[static_cast<size_t>(id_col)]);
      lr.label = parse_label_field(row[static_cast<size_t>(label_col)]);
      ds.rows.push_back(std::move(lr));
    } catch (const Error& e) {
      if (strict)
        fail(ErrorKind::ParseError,
             "row " + std::to_string(r) + ": " + e.what());
      ds.issues.push_back({r, e.what()});
    }
  }
  return ds;
}

Dataset load_jsonl(const std::string& path, bool strict) {
  std::string text = read_file(path);
  Dataset ds;
  std::istringstream in(text);
  std::string line;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      json j = json::parse(line);
      if (!j.contains("id")) fail(ErrorKind::MissingColumn, "jsonl row is missing field: id");
      if (!j.contains("rxn")) fail(ErrorKind::MissingColumn, "jsonl row is missing field: rxn");
      LabeledReaction lr;
      lr.reaction = parse_rxn_field(j.at("rxn").get<std::string>(),
                                    j.at("id").get<std::string>());
      if (j.contains("label") && !j.at("label").is_null())
        lr.label = j.at("label").get<double>();
      ds.rows.push_back(std::move(lr));
    } catch (const Error& e) {
      if (strict)
        fail(ErrorKind::ParseError, "row " + std::to_string(row) + ": " + e.what());
      ds.issues.push_back({row, e.what()});
    } catch (const json::exception& e) {
      if (strict)
        fail(ErrorKind::ParseError, "row " + std::to_string(row) + ": " + e.what());
      ds.issues.push_back({row, e.what()});
    }
  }
  if (ds.rows.empty() && ds.issues.empty())
    fail(ErrorKind::EmptyDataset, "no rows in " + path);
  return ds;
}

}  // namespace

Dataset load_dataset(const std::string& path, const std::string& format,
                     bool strict) {
  std::string fmt = format;
  if (fmt == "auto") {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    fmt = (ext == "jsonl" || ext == "json") ? "jsonl" : "csv";
  }
  if (fmt == "csv") return load_csv(path, strict);
  if (fmt == "jsonl") return load_jsonl(path, strict);
  fail(ErrorKind::InvalidArgument, "unknown dataset format: " + format);
}

void load_coords(const std::string& path, std::vector<LabeledReaction>& rows) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("coords file: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::ParseError, "coords file: expected a JSON object");
  for (auto& lr : rows) {
    auto it = j.find(lr.reaction.id);
    if (it == j.end()) continue;  // coords are optional per reaction
    const json& mols = *it;
    size_t n_mols = lr.reaction.reactants.size() + lr.reaction.products.size();
    if (!mols.is_array() || mols.size() != n_mols)
      fail(ErrorKind::LengthMismatch,
           "coords for " + lr.reaction.id + ": expected " +
               std::to_string(n_mols) + " molecule blocks");
    for (size_t m = 0; m < n_mols; ++m) {
      Conformer& conf = m < lr.reaction.reactants.size()
                            ? lr.reaction.reactants[m]
                            : lr.reaction.products[m - lr.reaction.reactants.size()];
      const json& block = mols[m];
      if (!block.is_array() ||
          block.size() != conf.graph.atoms().size())
        fail(ErrorKind::LengthMismatch,
             "coords for " + lr.reaction.id + " molecule " + std::to_string(m) +
                 ": atom count mismatch");
      conf.coords.clear();
      conf.coords.reserve(block.size());
      for (const json& xyz : block) {
        if (!xyz.is_array() || xyz.size() != 3)
          fail(ErrorKind::ParseError,
               "coords for " + lr.reaction.id + ": each atom needs [x,y,z]");
        conf.coords.push_back(
            {xyz[0].get<double>(), xyz[1].get<double>(), xyz[2].get<double>()});
      }
    }
  }
}

}  // namespace rxnshingle
