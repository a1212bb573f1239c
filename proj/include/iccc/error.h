// Exception types shared by the pipeline stages.

#ifndef ICCC_ERROR_H_
#define ICCC_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iccc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural defect in an input file. byte_offset is the position in the
// file where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class DuplicateRecordError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// No concept in the base survives the exclusion rules for this caption.
class NoReplacementAvailable : public Error {
 public:
  using Error::Error;
};

// Both swap operands render to the same (case-folded) text.
class SwapDegenerate : public Error {
 public:
  using Error::Error;
};

// The caption offers nothing to perturb under the active configuration.
class CaptionSkipped : public Error {
 public:
  using Error::Error;
};

}  // namespace iccc

#endif  // ICCC_ERROR_H_
