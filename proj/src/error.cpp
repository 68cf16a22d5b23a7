#include "stochavg/error.hpp"

namespace stochavg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NegativeWeights: return "NegativeWeights";
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::NoUniqueStationary: return "NoUniqueStationary";
    case ErrorKind::Divergent: return "Divergent";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::StrideTooCoarse: return "StrideTooCoarse";
    case ErrorKind::InsufficientTrials: return "InsufficientTrials";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace stochavg
