#pragma once

#include <cstdio>
#include <functional>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace esc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: shapes, signs, ranges, JSON fields.
struct ConfigError : Error {
  using Error::Error;
};
struct DimensionError : ConfigError {
  using ConfigError::ConfigError;
};
struct NotSymmetricError : ConfigError {
  using ConfigError::ConfigError;
};
struct NotPositiveDefiniteError : ConfigError {
  using ConfigError::ConfigError;
};
struct NotHurwitzError : ConfigError {
  using ConfigError::ConfigError;
};

/// A certificate inequality or LMI has no admissible solution.
struct InfeasibleError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};
struct SingularMatrixError : NumericError {
  using NumericError::NumericError;
};
/// Simulation state left the finite range; index is the offending step.
struct NonFiniteStateError : NumericError {
  NonFiniteStateError(const std::string& what, long long idx) : NumericError(what), index(idx) {}
  long long index;
};
struct InsufficientHistoryError : NumericError {
  using NumericError::NumericError;
};

// Non-fatal diagnostics. Default sink writes to stderr; tests swap it out.
using WarningSink = std::function<void(const std::string&)>;

namespace detail {
inline WarningSink& warning_sink_ref() {
  static WarningSink sink;
  return sink;
}
inline std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

inline WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(detail::warning_mutex());
  return std::exchange(detail::warning_sink_ref(), std::move(sink));
}

inline void warn(const std::string& message) {
  std::lock_guard lock(detail::warning_mutex());
  if (auto& sink = detail::warning_sink_ref())
    sink(message);
  else
    std::fprintf(stderr, "warning: %s\n", message.c_str());
}

/// Emits each distinct message at most once per process.
inline void warn_once(const std::string& message) {
  static std::set<std::string> seen;
  static std::mutex m;
  {
    std::lock_guard lock(m);
    if (!seen.insert(message).second) return;
  }
  warn(message);
}

}  // namespace esc
