#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grpde {

/// Failure categories shared across the toolkit. Callers that need to react to a
/// particular failure inspect `Error::code()`; everyone else just reads `what()`.
enum class Errc {
  GridTooSmall,
  GridMismatch,
  ResonantShift,
  IncompatibleRhs,
  ZeroDiagonal,
  OddGrid,
  HierarchyMismatch,
  NonlinearSolver,
  ShapeMismatch,
  LengthMismatch,
  EmptyCosts,
  BadId,
  BadTau,
  BadMode,
  DivergedIterate,
  EmptyDataset,
  MissingSurrogate,
  SearchTooLarge,
  NoConvergence,
  DegenerateDenominator,
  NotSimultaneouslyDiagonalizable,
  IoError,
  FormatVersionMismatch,
  ChecksumMismatch,
  KindMismatch,
  ConfigParse,
  MissingCheckpoint,
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace grpde
