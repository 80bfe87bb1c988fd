#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace abohm {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Every failure the library raises carries a short stable tag (useful for the
// CLI exit-code mapping and for tests) plus a human-readable message.
class Error : public std::runtime_error {
public:
  Error(std::string tag, const std::string& msg)
      : std::runtime_error(tag + ": " + msg), tag_(std::move(tag)) {}
  const std::string& tag() const { return tag_; }

private:
  std::string tag_;
};

[[noreturn]] inline void fail(const std::string& tag, const std::string& msg) {
  throw Error(tag, msg);
}

inline void require(bool ok, const std::string& tag, const std::string& msg) {
  if (!ok) fail(tag, msg);
}

// Exact rational with int64 components. Fluxes coming out of the dyadic
// schedule are stored this way so "distance to the integers" statements can
// be checked in integer arithmetic instead of floating point.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

  void normalize() {
    require(den != 0, "invalid-rational", "zero denominator");
    if (den < 0) { den = -den; num = -num; }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return double(num) / double(den); }

  // distance from num/den to the nearest integer, exact, returned as a
  // rational with the same denominator
  Rational dist_to_integers() const {
    std::int64_t r = num % den;
    if (r < 0) r += den;
    std::int64_t d = std::min(r, den - r);
    return Rational(d, den);
  }

  Rational times(std::int64_t k) const { return Rational(num * k, den); }

  bool operator==(const Rational& o) const {
    return num == o.num && den == o.den;
  }
};

// Splitmix-style mixing so per-row seeds derived from a config seed are
// decorrelated regardless of row index spacing.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must be
// independent; results should be written to distinct slots so output order
// never depends on scheduling.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned k = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(k);
  std::size_t chunk = (n + k - 1) / k;
  for (unsigned t = 0; t < k; ++t) {
    std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace abohm
