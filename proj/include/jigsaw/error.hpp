#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jigsaw {

enum class Errc {
  InvalidArgument,
  NonDivisibleGrid,
  NonSquareTile,
  SlotCollision,
  ErosionTooLarge,
  SizeMismatch,
  NonSquare,
  Degenerate,
  IterationRecordMissing,
  MoreRowsThanColumns,
  NonPositiveTemperature,
  SourceUnavailable,
  DecodeError,
  DimensionMismatch,
  ShapeMismatch,
  EmptyDataset,
  NaNLoss,
  MissingPieces,
  EmptyPresentSet,
  TooFewSamples,
  IoError,
  NoImagesFound,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures surface as this type; `code()` identifies the contract
// that was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace jigsaw
