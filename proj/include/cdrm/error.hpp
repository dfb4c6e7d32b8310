#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdrm {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied arguments of the wrong shape or range.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A non-finite loss or gradient appeared during optimisation.
class TrainingDivergence : public Error {
 public:
  TrainingDivergence(const std::string& what, long epoch)
      : Error(what), epoch_(epoch) {}
  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

// A Langevin chain produced a non-finite gradient.
class SamplingFailure : public Error {
 public:
  SamplingFailure(const std::string& what, std::size_t sample_index)
      : Error(what), sample_index_(sample_index) {}
  std::size_t sample_index() const { return sample_index_; }

 private:
  std::size_t sample_index_;
};

class DegenerateDataset : public Error {
 public:
  using Error::Error;
};

class EmptyValidSet : public Error {
 public:
  using Error::Error;
};

// Inference was requested on a model without fitted density statistics.
class UnpreparedModel : public Error {
 public:
  using Error::Error;
};

class OutOfBounds : public Error {
 public:
  OutOfBounds(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

}  // namespace cdrm
