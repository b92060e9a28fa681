#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace scarsim {

using cplx = std::complex<double>;

/// Occupation bitstring; bit i set iff site i is in the Rydberg state.
using Bits = std::uint64_t;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Frequencies quoted as nu = w/2pi in MHz convert to angular rad/us.
constexpr double mhz_to_angular(double mhz) { return kTwoPi * mhz; }
constexpr double angular_to_mhz(double w) { return w / kTwoPi; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input handed to a library routine (wrong geometry, mismatched sizes...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A problem that does not fit the configured memory/dimension budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A numerical guard was violated (non-PSD density matrix, failed fit...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace scarsim
