#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace posekit {

// Every error carries a stable code string. The CLI surfaces it as JSON on
// stderr and maps it to a process exit code (see README).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error("validation", message) {}
};

class SingularMapError : public Error {
 public:
  explicit SingularMapError(const std::string& message)
      : Error("singular_map", message) {}
};

class DegeneratePoseError : public Error {
 public:
  explicit DegeneratePoseError(const std::string& message)
      : Error("degenerate_pose", message) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& message)
      : Error("insufficient_data", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message)
      : Error("schema", message) {}
};

}  // namespace posekit
