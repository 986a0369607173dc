#include "rbmamp/error.hpp"

namespace rbmamp {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation:
      return 2;
    case ErrorKind::Io:
      return 3;
    case ErrorKind::Divergence:
      return 4;
  }
  return 1;
}

}  // namespace rbmamp
