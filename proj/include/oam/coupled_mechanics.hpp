#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "oam/device_model.hpp"

namespace oam::mech {

using cplx = std::complex<double>;

/// chi(omega) = 1 / (omega_i^2 - omega^2 - i gamma_i omega), in s^2.
/// Throws PoleError for gamma_i == 0 exactly on resonance.
cplx susceptibility(double omega, double omega_i, double gamma_i);

/// Pad twist mode (1) coupled to nanobeam bounce mode (2) through a spring of
/// rate g_m. All frequencies and rates are angular.
class CoupledOscillator {
 public:
  struct Params {
    double m1 = 0.0;
    double m2 = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double g_m = 0.0;
  };

  /// Throws ValidationError on non-physical or statically unstable
  /// parameters (omega1^2 omega2^2 <= g_m^4).
  explicit CoupledOscillator(const Params& p);

  const Params& params() const { return p_; }
  double m1() const { return p_.m1; }
  double m2() const { return p_.m2; }
  double omega1() const { return p_.omega1; }
  double omega2() const { return p_.omega2; }
  double gamma1() const { return p_.gamma1; }
  double gamma2() const { return p_.gamma2; }
  double g_m() const { return p_.g_m; }

  /// Stiffness matrix K (row-major 2x2) in x'' = -K x - Gamma x' + f / m.
  std::array<double, 4> stiffness() const;

 private:
  Params p_;
};

struct DriveSpec {
  double force = 0.0;  // N
  double omega = 0.0;  // rad/s
};

struct DrivenResponse {
  cplx x1;
  cplx x2;
};

/// Steady-state complex amplitudes under F e^{-i omega t} on the pad.
DrivenResponse driven_response(const CoupledOscillator& model, const DriveSpec& drive);

struct ResponseCurve {
  std::vector<double> omega;
  std::vector<cplx> x1;
  std::vector<cplx> x2;
};

ResponseCurve response_curve(const CoupledOscillator& model, double force,
                             std::span<const double> omega_grid);

/// Indices of interior local maxima, found where the discrete derivative
/// changes sign from positive to non-positive.
std::vector<std::size_t> find_peaks(std::span<const double> values);

std::vector<double> magnitudes(std::span<const cplx> values);

struct HybridFrequencies {
  double lower = 0.0;
  double upper = 0.0;
};

/// Undamped normal-mode frequencies of the coupled pair.
HybridFrequencies hybrid_frequencies(double omega1, double omega2, double g_m);
HybridFrequencies hybrid_frequencies(const CoupledOscillator& model);

struct BareFrequencies {
  double twist = 0.0;   // omega1
  double bounce = 0.0;  // omega2
};

/// Inverse of hybrid_frequencies: the bare pair, ordered (lower, upper), that
/// hybridizes into the given branches for coupling g_m.
BareFrequencies bare_from_hybrid(double lower, double upper, double g_m);

/// omega1(l_s) = intercept + slope * (l_s - reference_ls), l_s in µm.
struct LinearModel {
  double intercept = 0.0;
  double slope = 0.0;
  double reference_ls = 0.0;

  double operator()(double l_s_um) const { return intercept + slope * (l_s_um - reference_ls); }
};

struct AnticrossingPoint {
  double l_s_um = 0.0;
  double omega_minus = 0.0;
  double omega_plus = 0.0;
};

struct FitOptions {
  bool fit_omega2 = false;
  int max_iterations = 200;
  double tolerance = 1e-15;
};

struct GmFit {
  double g_m = 0.0;
  LinearModel omega1;
  double omega2 = 0.0;
  /// Euclidean norm of the frequency residuals, rad/s.
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Least-squares fit of hybrid_frequencies to anti-crossing data over g_m and
/// the affine omega1(l_s); omega2 is held fixed unless options.fit_omega2.
/// Throws FitError (carrying the best residual) if it does not converge.
GmFit fit_gm(std::span<const AnticrossingPoint> data, const LinearModel& omega1_initial,
             double omega2, const FitOptions& options = {});

/// fit_gm with starting values estimated from the data itself; omega2 is fitted.
GmFit fit_gm(std::span<const AnticrossingPoint> data);

/// Equation-of-motion transfer from torque to the transduced displacement:
/// x = tau / (m_eff r_eff (omega_m^2 - omega^2 + i omega omega_m / Q_m)).
cplx torque_to_displacement(const device::MechanicalModeRecord& mode, double tau, double omega);

/// Cavity frequency shift (rad/s) for torque tau at drive frequency omega.
double optomechanical_shift(const device::MechanicalModeRecord& mode, double tau, double omega);

inline constexpr const char* kResponseCurveHeader =
    "omega_hz,abs_x1_m,arg_x1_rad,abs_x2_m,arg_x2_rad";

void write_response_curve(const ResponseCurve& curve, std::ostream& out);

}  // namespace oam::mech
