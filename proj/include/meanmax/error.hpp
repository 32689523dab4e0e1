#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace meanmax {

// Reasons an input is rejected by the library. Callers that need to tell
// "budget too small" from "budget larger than the sample" switch on these.
enum class InputErrc {
  empty_sample,
  non_finite_value,
  budget_below_one,
  budget_exceeds_sample,
  out_of_range,
  degenerate_bandwidth,
  bad_distribution,
  mismatched_grids,
  unknown_name,
};

class InvalidInput : public std::invalid_argument {
 public:
  InvalidInput(InputErrc code, const std::string& what)
      : std::invalid_argument(what), code_(code) {}

  InputErrc code() const noexcept { return code_; }

 private:
  InputErrc code_;
};

enum class RunsErrc {
  missing_file,
  malformed_row,
  non_finite_value,
  empty_data,
};

// Raised while ingesting a runs CSV. `line()` is 1-based, 0 when the error
// is not tied to a line.
class RunsFileError : public std::runtime_error {
 public:
  RunsFileError(RunsErrc code, std::size_t line, const std::string& what)
      : std::runtime_error(what), code_(code), line_(line) {}

  RunsErrc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  RunsErrc code_;
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace meanmax
