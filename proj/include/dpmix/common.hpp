#pragma once
// Shared utilities: error checks, log-space arithmetic, label canonicalization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpmix {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Invalid caller-supplied input (files, flags, parameters): exit code 1 at the CLI.
inline void check_arg(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Broken internal invariant (a bug, never bad input): exit code 2 at the CLI.
inline void check_logic(bool ok, const std::string& msg) {
  if (!ok) throw std::logic_error(msg);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double logsumexp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Relabels clusters by first appearance: the first point gets label 0, the next
// point in a different cluster gets 1, and so on. All assignments reported by
// the library are in this form.
inline std::vector<int> canonicalize_assignment(const std::vector<int>& assign) {
  std::vector<int> out(assign.size());
  std::vector<int> remap;  // remap[new_label] = old label, in appearance order
  for (std::size_t i = 0; i < assign.size(); ++i) {
    int old_label = assign[i];
    int new_label = -1;
    for (std::size_t k = 0; k < remap.size(); ++k) {
      if (remap[k] == old_label) { new_label = static_cast<int>(k); break; }
    }
    if (new_label < 0) {
      new_label = static_cast<int>(remap.size());
      remap.push_back(old_label);
    }
    out[i] = new_label;
  }
  return out;
}

// Smallest k with 2^k >= n (n >= 1). Used for the random-initialization cluster count.
inline int ceil_log2(std::int64_t n) {
  check_arg(n >= 1, "ceil_log2: n must be >= 1");
  int k = 0;
  std::int64_t p = 1;
  while (p < n) { p <<= 1; ++k; }
  return k;
}

}  // namespace dpmix
