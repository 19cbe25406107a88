#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmax {

/// Coarse failure class. The CLI prints `kind_name()` as the machine-readable
/// error tag, so the names are part of the external interface.
enum class ErrorKind {
  invalid_argument,
  io,
  format,
  numerical,
  data,
  config,
};

std::string_view kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace hmax
