#include "cqw/format.hpp"

#include <charconv>

namespace cqw {

std::string format_double(double v, int significant) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, significant);
  return std::string(buf, r.ptr);
}

}  // namespace cqw
