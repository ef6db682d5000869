#pragma once

#include <stdexcept>
#include <string>

namespace emberops {

// Base of everything the library throws on a contract violation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that could not be read: malformed text, missing or mistyped keys.
class ParseError : public Error {
 public:
  ParseError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Input that parsed but breaks a domain invariant (e.g. an airport on water).
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

#define EMBEROPS_DEFINE_ERROR(Name) \
  class Name : public Error {       \
   public:                          \
    using Error::Error;             \
  }

EMBEROPS_DEFINE_ERROR(OutOfRange);
EMBEROPS_DEFINE_ERROR(OutOfBounds);
EMBEROPS_DEFINE_ERROR(NotFlammable);
EMBEROPS_DEFINE_ERROR(DegenerateFootprint);
EMBEROPS_DEFINE_ERROR(NoFire);
EMBEROPS_DEFINE_ERROR(EpisodeFinished);
EMBEROPS_DEFINE_ERROR(InvalidAction);
EMBEROPS_DEFINE_ERROR(NotInitialized);
EMBEROPS_DEFINE_ERROR(MaximaViolation);
EMBEROPS_DEFINE_ERROR(DimensionMismatch);
EMBEROPS_DEFINE_ERROR(NonFiniteLogits);
EMBEROPS_DEFINE_ERROR(IncompleteTrajectory);
EMBEROPS_DEFINE_ERROR(NonFiniteGradient);
EMBEROPS_DEFINE_ERROR(EmptySample);
EMBEROPS_DEFINE_ERROR(WindowTooLarge);
EMBEROPS_DEFINE_ERROR(CheckpointMismatch);

#undef EMBEROPS_DEFINE_ERROR

}  // namespace emberops
