#pragma once

#include <stdexcept>
#include <string>

namespace weakmatch {

// Every error raised by the library carries a category that the CLI maps to
// an exit code (config 3, data-format 4, runtime 5).
enum class ErrorCategory { config, format, runtime };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::format, what) {}
};

class RuntimeError : public Error {
 public:
  explicit RuntimeError(const std::string& what) : Error(ErrorCategory::runtime, what) {}
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::format: return "data-format";
    case ErrorCategory::runtime: return "runtime";
  }
  return "runtime";
}

inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 3;
    case ErrorCategory::format: return 4;
    case ErrorCategory::runtime: return 5;
  }
  return 5;
}

}  // namespace weakmatch
