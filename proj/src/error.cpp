#include "storyline/error.hpp"

namespace storyline {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Data: return "data";
    case ErrorKind::Invariant: return "invariant";
  }
  return "unknown";
}

}  // namespace storyline
