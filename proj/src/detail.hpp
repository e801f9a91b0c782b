#pragma once

#include <cmath>

namespace ropo::detail {

// Action values closer than this are ties; the earlier action is kept.
inline bool improves_on(double candidate, double incumbent) {
  return candidate > incumbent + 1e-10 * (1.0 + std::abs(incumbent));
}

}  // namespace ropo::detail
