#include "sizzle/errors.hpp"

namespace sizzle {

int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::NonConvergence: return 3;
    case ErrorKind::Numerical: return 4;
    }
    return 1;
}

}  // namespace sizzle
