#pragma once

#include <stdexcept>
#include <string>

namespace bar {

enum class Errc {
  invalid_argument = 1,
  out_of_range = 2,
  config = 3,
  runtime = 4,
};

/// Exception type thrown by every core routine. The C API maps `code()`
/// onto its status enum one-to-one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, Errc code, const char* what) {
  if (!ok) throw Error(code, what);
}

}  // namespace bar
