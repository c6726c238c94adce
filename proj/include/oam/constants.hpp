#pragma once

#include <numbers>

namespace oam {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kSpeedOfLight = 2.99792458e8;   // m/s
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K

/// Optical angular frequency (rad/s) of a vacuum wavelength in metres.
constexpr double angular_frequency(double wavelength_m) {
  return kTwoPi * kSpeedOfLight / wavelength_m;
}

constexpr double to_angular(double hz) { return kTwoPi * hz; }
constexpr double to_hz(double rad_per_s) { return rad_per_s / kTwoPi; }

}  // namespace oam
