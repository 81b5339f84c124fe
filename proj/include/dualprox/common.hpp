#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualprox {

using Vec = std::vector<double>;

// Bad input data or a violated precondition (dimension mismatch, malformed
// file, inconsistent bounds). Maps to exit code 2 in the CLI.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown in an iterative routine. Maps to exit code 3 in the CLI.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Positive and negative parts: pos_part(t) - neg_part(t) == t, both >= 0.
inline double pos_part(double t) { return t > 0.0 ? t : 0.0; }
inline double neg_part(double t) { return t < 0.0 ? -t : 0.0; }

inline double inf_norm(const Vec& v) {
  double r = 0.0;
  for (double t : v) r = std::max(r, std::abs(t));
  return r;
}

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double dot(const Vec& a, const Vec& b) {
  return dot(a.data(), b.data(), static_cast<int>(a.size()));
}

inline bool all_finite(const Vec& v) {
  for (double t : v)
    if (!std::isfinite(t)) return false;
  return true;
}

// FNV-1a, used to fingerprint text blobs in file headers.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Deterministic seed derivation for per-sample / per-attempt streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  for (std::uint64_t v : {a, b}) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
  }
  return h;
}

}  // namespace dualprox
