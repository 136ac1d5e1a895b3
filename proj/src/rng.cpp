#include "star/rng.hpp"

#include "star/error.hpp"

#include <cmath>
#include <stdexcept>

namespace star {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw Error("Rng::below: n must be positive");
  // Classic rejection: draw until the word falls in the largest multiple of n.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Marsaglia polar method; the rejection loop keeps draw order fixed.
  double u, v, s;
  do {
    u = 2.0 * unit_real() - 1.0;
    v = 2.0 * unit_real() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
  if (k > n)
    throw Error("sample_without_replacement: k exceeds n");
  std::vector<size_t> pool(n);
  for (size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + size_t(below(n - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

std::vector<size_t> Rng::weighted_sample_without_replacement(
    std::span<const double> weights, size_t k) {
  const size_t n = weights.size();
  if (k > n)
    throw Error(
        "weighted_sample_without_replacement: k exceeds population");
  std::vector<double> w(weights.begin(), weights.end());
  std::vector<size_t> alive(n);
  for (size_t i = 0; i < n; ++i) alive[i] = i;
  double total = 0.0;
  for (double x : w) {
    if (!(x > 0.0))
      throw Error(
          "weighted_sample_without_replacement: weights must be positive");
    total += x;
  }
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t draw = 0; draw < k; ++draw) {
    double r = unit_real() * total;
    size_t pick = alive.size() - 1;  // guards against accumulated rounding
    double acc = 0.0;
    for (size_t i = 0; i < alive.size(); ++i) {
      acc += w[alive[i]];
      if (r < acc) {
        pick = i;
        break;
      }
    }
    out.push_back(alive[pick]);
    total -= w[alive[pick]];
    alive.erase(alive.begin() + ptrdiff_t(pick));
  }
  return out;
}

}  // namespace star
