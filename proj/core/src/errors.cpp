#include "spaceiv/errors.hpp"

namespace spaceiv {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularStructure:
      return "SingularStructure";
    case ErrorKind::InvalidSampleSize:
      return "InvalidSampleSize";
    case ErrorKind::CyclicGraph:
      return "CyclicGraph";
    case ErrorKind::SizeGuard:
      return "SizeGuard";
    case ErrorKind::DegenerateResidual:
      return "DegenerateResidual";
    case ErrorKind::RankDeficientInstruments:
      return "RankDeficientInstruments";
    case ErrorKind::EigenFailure:
      return "EigenFailure";
    case ErrorKind::NormalizationFailure:
      return "NormalizationFailure";
    case ErrorKind::RankDeficientFirstStage:
      return "RankDeficientFirstStage";
    case ErrorKind::RankDeficientDesign:
      return "RankDeficientDesign";
    case ErrorKind::AllSubsetsFailed:
      return "AllSubsetsFailed";
    case ErrorKind::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorKind::InvalidArgument:
      return "InvalidArgument";
    case ErrorKind::ParseError:
      return "ParseError";
    case ErrorKind::IoError:
      return "IoError";
  }
  return "Unknown";
}

}  // namespace spaceiv
