#pragma once

#include <string>

namespace cqw {

/// Locale-independent text for a double; 17 significant digits round-trip exactly.
std::string format_double(double v, int significant = 17);
/// Short form for messages.
inline std::string format_short(double v) { return format_double(v, 6); }

}  // namespace cqw
