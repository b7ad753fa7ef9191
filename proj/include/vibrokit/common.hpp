#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace vibrokit {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double x) {
    return x - kTwoPi * std::ceil((x - kPi) / kTwoPi);
}

/// Raised when a computation fails numerically (singular factor, non-finite
/// state, residual above tolerance). Messages carry a stage tag so pipeline
/// callers can report where things went wrong.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace vibrokit
