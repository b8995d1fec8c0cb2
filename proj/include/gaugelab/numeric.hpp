#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace gaugelab {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

// Maximizes a unimodal function on [lo, hi] by golden-section search.
// Returns (argmax, max). Stops when the bracket is shorter than tol.
template <typename F>
std::pair<double, double> golden_section_max(F&& f, double lo, double hi, double tol = 1e-10,
                                             int max_iter = 200) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

template <typename F>
std::pair<double, double> golden_section_min(F&& f, double lo, double hi, double tol = 1e-10,
                                             int max_iter = 200) {
  auto [x, v] = golden_section_max([&](double t) { return -f(t); }, lo, hi, tol, max_iter);
  return {x, -v};
}

// splitmix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace gaugelab
