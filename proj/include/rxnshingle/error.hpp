#pragma once

#include <stdexcept>
#include <string>

namespace rxnshingle {

enum class ErrorKind {
  // smiles / reactions
  EmptyInput,
  UnknownElement,
  UnbalancedParen,
  UnmatchedRingBond,
  MissingArrow,
  EmptyReactantSide,
  EmptyProductSide,
  // geometry / data
  AtomCountMismatch,
  MissingCoordinates,
  // tensors
  ShapeMismatch,
  NotScalar,
  DetachedTensor,
  NonFiniteValue,
  // training / metrics
  LengthMismatch,
  DegenerateSplit,
  EmptyDataset,
  KTooLarge,
  LabelOutOfRange,
  NonFiniteLoss,
  IndexOutOfRange,
  InvalidArgument,
  // io
  IoError,
  ParseError,
  MissingColumn,
  BadCheckpoint,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::UnknownElement: return "UnknownElement";
    case ErrorKind::UnbalancedParen: return "UnbalancedParen";
    case ErrorKind::UnmatchedRingBond: return "UnmatchedRingBond";
    case ErrorKind::MissingArrow: return "MissingArrow";
    case ErrorKind::EmptyReactantSide: return "EmptyReactantSide";
    case ErrorKind::EmptyProductSide: return "EmptyProductSide";
    case ErrorKind::AtomCountMismatch: return "AtomCountMismatch";
    case ErrorKind::MissingCoordinates: return "MissingCoordinates";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotScalar: return "NotScalar";
    case ErrorKind::DetachedTensor: return "DetachedTensor";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateSplit: return "DegenerateSplit";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::BadCheckpoint: return "BadCheckpoint";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  const char* kind_name() const { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace rxnshingle
