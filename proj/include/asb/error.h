#ifndef ASB_ERROR_H_
#define ASB_ERROR_H_

#include <stdexcept>
#include <string>

namespace asb {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kUsage = 1,
  kData = 2,
  kProvider = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

// Bad arguments, missing files, unknown enum values on the command line.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

// Parse, integrity, format, lookup and coverage failures in input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::kData, message) {}
};

class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& message)
      : Error(ErrorKind::kProvider, message) {}
};

}  // namespace asb

#endif  // ASB_ERROR_H_
