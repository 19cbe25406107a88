#include "hmax/error.hpp"

namespace hmax {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::io: return "io_error";
    case ErrorKind::format: return "format_error";
    case ErrorKind::numerical: return "numerical_error";
    case ErrorKind::data: return "data_error";
    case ErrorKind::config: return "config_error";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hmax
