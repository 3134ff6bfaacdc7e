#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace totalloss {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteInput,
  NegativeInput,
  ZeroActual,
  EmptyAfterFiltering,
  EmptyVector,
  QOutOfRange,
  LengthMismatch,
  NegativeCoefficient,
  LogOfNonPositive,
  TransformDomain,
  NonPositiveLoss,
  TagMismatch,
  DegenerateGrid,
  NoNonMaximalLoss,
  NoConstruction,
  MissingColumn,
  UnknownColumn,
  NonNumericCell,
  DuplicateUnitId,
  EmptyFile,
  Io,
  SpecSyntax,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Error(ErrorCode code, const std::string& message, std::vector<std::size_t> indices)
      : std::runtime_error(message), code_(code), indices_(std::move(indices)) {}

  ErrorCode code() const noexcept { return code_; }

  // Offending element positions, when the error is about specific entries
  // (NonPositiveLoss lists every index that cannot be logged).
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

 private:
  ErrorCode code_;
  std::vector<std::size_t> indices_;
};

}  // namespace totalloss
