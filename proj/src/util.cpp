#include "fairaes/error.hpp"
#include "fairaes/hashing.hpp"
#include "fairaes/random.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace fairaes {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Stratification: return "stratification";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Config: return "config";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::DegenerateAgreement: return "degenerate-agreement";
    case ErrorKind::UndefinedReduction: return "undefined-reduction";
    case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
    case ErrorKind::Compatibility: return "compatibility";
    case ErrorKind::Dependency: return "dependency";
    case ErrorKind::FrozenViolation: return "frozen-violation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

std::uint64_t fnv1a64_bytes(std::span<const std::byte> bytes, std::uint64_t state) {
  for (std::byte b : bytes) {
    state ^= static_cast<std::uint64_t>(b);
    state *= kFnvPrime;
  }
  return state;
}

std::uint64_t checksum(std::span<const double> values) {
  return fnv1a64_bytes(std::as_bytes(values));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return splitmix64(splitmix64(seed) ^ fnv1a64(stream));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) + splitmix64(index ^ 0x5bd1e995ULL));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1].
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace fairaes
