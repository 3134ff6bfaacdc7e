#include "totalloss/error.hpp"

namespace totalloss {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::ZeroActual: return "ZeroActual";
    case ErrorCode::EmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::QOutOfRange: return "QOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorCode::LogOfNonPositive: return "LogOfNonPositive";
    case ErrorCode::TransformDomain: return "TransformDomain";
    case ErrorCode::NonPositiveLoss: return "NonPositiveLoss";
    case ErrorCode::TagMismatch: return "TagMismatch";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::NoNonMaximalLoss: return "NoNonMaximalLoss";
    case ErrorCode::NoConstruction: return "NoConstruction";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::DuplicateUnitId: return "DuplicateUnitId";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::Io: return "Io";
    case ErrorCode::SpecSyntax: return "SpecSyntax";
  }
  return "Unknown";
}

}  // namespace totalloss
