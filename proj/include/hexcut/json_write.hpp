#pragma once

#include <cstdio>
#include <string>

namespace hexcut::detail {

// Fixed 6-decimal float formatting. Serialized files must be byte-identical
// across runs, so all JSON writers share this one formatter.
inline std::string fmt6(double v) {
  if (v == 0.0) v = 0.0;  // squash -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace hexcut::detail
