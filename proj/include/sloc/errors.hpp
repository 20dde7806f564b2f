#pragma once

#include <stdexcept>
#include <string>

namespace sloc {

// All library failures derive from Error and carry a stable machine-parsable
// code (the CLI prints it on stderr as "error: <code>: <message>").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& m) : Error("E_DIM", m) {}
};

struct NotPsd : Error {
  explicit NotPsd(const std::string& m) : Error("E_NOT_PSD", m) {}
};

struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& m) : Error("E_SINGULAR", m) {}
};

struct SupportMismatch : Error {
  explicit SupportMismatch(const std::string& m) : Error("E_SUPPORT", m) {}
};

struct AbsoluteContinuityViolation : Error {
  explicit AbsoluteContinuityViolation(const std::string& m) : Error("E_ABS_CONT", m) {}
};

struct InvalidGeometry : Error {
  explicit InvalidGeometry(const std::string& m) : Error("E_GEOMETRY", m) {}
};

struct InvalidParameter : Error {
  explicit InvalidParameter(const std::string& m) : Error("E_PARAM", m) {}
};

struct NonFiniteInput : Error {
  explicit NonFiniteInput(const std::string& m) : Error("E_NONFINITE", m) {}
};

struct EmptyPosterior : Error {
  explicit EmptyPosterior(const std::string& m) : Error("E_EMPTY_POSTERIOR", m) {}
};

struct StepTooLarge : Error {
  explicit StepTooLarge(const std::string& m) : Error("E_STEP_TOO_LARGE", m) {}
};

struct InsufficientSamples : Error {
  explicit InsufficientSamples(const std::string& m) : Error("E_SAMPLES", m) {}
};

struct InsufficientPaths : Error {
  explicit InsufficientPaths(const std::string& m) : Error("E_PATHS", m) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("E_PARSE", m) {}
};

}  // namespace sloc
