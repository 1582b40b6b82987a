#pragma once

#include <stdexcept>
#include <string>

namespace cuspidal {

enum class ErrorKind {
  InvalidInput,     // malformed parameters
  InputFile,        // unreadable or malformed input file
  Precondition,     // operation called outside its domain
  Degenerate,       // elimination or geometry degenerates (e.g. identically zero polynomial)
  Unreachable,      // target outside the workspace
  Anomaly,          // numerical analysis produced an inconsistent result
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::InputFile: return "input_file";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Unreachable: return "unreachable";
    case ErrorKind::Anomaly: return "anomaly";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cuspidal
