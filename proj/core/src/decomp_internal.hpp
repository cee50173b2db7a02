#pragma once

#include <cassert>
#include <vector>

namespace lclab::detail {

// Splits a span of g hops into consecutive hop distances, each in
// [l+1, 2l+1], summing to g. Used to place promoted nodes: with sentinels one
// hop outside both ends of a compress run, promoted nodes at these spacings
// leave residual segments of l..2l nodes. Requires g >= l+1.
inline std::vector<int> span_spacings(int g, int l) {
  assert(g >= l + 1);
  int parts = (g + 2 * l) / (2 * l + 1);  // ceil(g / (2l+1))
  std::vector<int> s(parts);
  int base = g / parts, rem = g % parts;
  for (int t = 0; t < parts; ++t) s[t] = base + (t < rem ? 1 : 0);
  assert(s.front() >= l + 1 && s.front() <= 2 * l + 1);
  assert(s.back() >= l + 1 && s.back() <= 2 * l + 1);
  return s;
}

}  // namespace lclab::detail
