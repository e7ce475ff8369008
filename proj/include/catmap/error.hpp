#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace catmap {

enum class ErrorKind {
  NonUnit,
  Ramified,
  EvenPrime,
  NotPrime,
  Overflow,
  DimensionMismatch,
  NotUnimodular,
  NotHyperbolic,
  NotNormalized,
  SingularPoint,
  NotSplit,
  NonUnitNu,
  KTooSmall,
  WrongK,
  BadCharacter,
  BadNu,
  NoMatch,
  EmptySet,
  TooLarge,
  ClusterMismatch,
  Schema,
  Internal,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonUnit: return "NonUnit";
    case ErrorKind::Ramified: return "Ramified";
    case ErrorKind::EvenPrime: return "EvenPrime";
    case ErrorKind::NotPrime: return "NotPrime";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotUnimodular: return "NotUnimodular";
    case ErrorKind::NotHyperbolic: return "NotHyperbolic";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::NotSplit: return "NotSplit";
    case ErrorKind::NonUnitNu: return "NonUnitNu";
    case ErrorKind::KTooSmall: return "KTooSmall";
    case ErrorKind::WrongK: return "WrongK";
    case ErrorKind::BadCharacter: return "BadCharacter";
    case ErrorKind::BadNu: return "BadNu";
    case ErrorKind::NoMatch: return "NoMatch";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ClusterMismatch: return "ClusterMismatch";
    case ErrorKind::Schema: return "Schema";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace catmap
