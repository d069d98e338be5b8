#include "grpde/error.hpp"

namespace grpde {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::GridTooSmall: return "GridTooSmall";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::ResonantShift: return "ResonantShift";
    case Errc::IncompatibleRhs: return "IncompatibleRHS";
    case Errc::ZeroDiagonal: return "ZeroDiagonal";
    case Errc::OddGrid: return "OddGrid";
    case Errc::HierarchyMismatch: return "HierarchyMismatch";
    case Errc::NonlinearSolver: return "NonlinearSolver";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyCosts: return "EmptyCosts";
    case Errc::BadId: return "BadId";
    case Errc::BadTau: return "BadTau";
    case Errc::BadMode: return "BadMode";
    case Errc::DivergedIterate: return "DivergedIterate";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::MissingSurrogate: return "MissingSurrogate";
    case Errc::SearchTooLarge: return "SearchTooLarge";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::NotSimultaneouslyDiagonalizable: return "NotSimultaneouslyDiagonalizable";
    case Errc::IoError: return "IoError";
    case Errc::FormatVersionMismatch: return "FormatVersionMismatch";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::ConfigParse: return "ConfigParse";
    case Errc::MissingCheckpoint: return "MissingCheckpoint";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

}  // namespace grpde
