#pragma once

#include <stdexcept>
#include <string>

namespace mrrnn {

// Exit codes shared by the command-line tool.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  resource = 2,
  alignment = 3,
  numerical = 4,
  config = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Missing, unreadable or malformed input resource.
struct ResourceError : Error {
  explicit ResourceError(const std::string& what) : Error(ExitCode::resource, what) {}
};

/// Parallel files (coarse vs. natural, tags vs. tokens, predictions vs. truth)
/// disagree in shape.
struct AlignmentError : Error {
  explicit AlignmentError(const std::string& what) : Error(ExitCode::alignment, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

}  // namespace mrrnn
