#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rxnshingle/mol.hpp"

namespace rxnshingle {

struct RowIssue {
  std::size_t row = 0;  // 1-based data row number
  std::string message;
};

struct Dataset {
  std::vector<LabeledReaction> rows;    // input order preserved
  std::vector<RowIssue> issues;         // rows skipped due to parse errors
};

// format: "csv", "jsonl", or "auto" (pick by file extension).
// CSV needs columns id, rxn, label; JSONL rows mirror those fields.
// Bad rows are collected in issues unless strict, which aborts instead.
Dataset load_dataset(const std::string& path, const std::string& format = "auto",
                     bool strict = false);

// Coordinate file: JSON object mapping reaction id to a list of per-molecule
// coordinate blocks, one [x,y,z] row per atom in input atom order. Molecule
// position follows the reaction SMILES: reactants (with agents appended),
// then products. Atom counts must match the parsed molecules.
void load_coords(const std::string& path, std::vector<LabeledReaction>& rows);

// RFC-4180: quoted fields, doubled quotes, newlines allowed inside quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_field(const std::string& field);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string version_string();

}  // namespace rxnshingle
