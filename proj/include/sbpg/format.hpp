#pragma once

#include <cstdio>
#include <string>

namespace sbpg {

// Shortest round-trippable decimal form, stable across runs ("%.17g" keeps
// every bit of a double). Used for all emitted numbers so output bytes are a
// pure function of the values.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace sbpg
