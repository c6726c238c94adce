#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "oam/device_model.hpp"

namespace oam::noise {

/// Cavity readout chain. The transmission dip is modelled as
/// T(Delta) = 1 - d / (1 + (2 Delta / kappa)^2) with the probe parked at the
/// steepest detuning.
struct OpticalReadout {
  double lambda0 = 1428e-9;  // m
  double q_o = 1e6;
  double dip_depth = 1.0;    // d in (0, 1]
  double p_det = 1e-7;       // W at the detector
  double eta_qe = 1.0;       // (0, 1]
  double p_dn = 2.5e-12;     // W/rtHz
  double n_cav = 1e-3;

  double omega0() const;
  double kappa() const;
  void validate() const;
};

/// Detector NEP presets (W/rtHz).
inline constexpr double kPhotoreceiverNep = 2.5e-12;
inline constexpr double kSinglePhotonDetectorNep = 3.8e-17;

struct CwModulation {
  double omega_mod = 0.0;  // rad/s; 0 means "at the mechanical frequency"
};

struct PulseTrain {
  double rep_rate_hz = 0.0;  // 0 means "at omega_m / 2 pi"
  double photons = 0.0;
};

struct SignalBeam {
  double lambda_sig = 840e-9;
  double delta_l = 1.0;
  double eta_conv = 1.0;
  double contrast = 1.0;  // modulation depth multiplier, (0, 1]
  std::variant<CwModulation, PulseTrain> modulation = CwModulation{};

  bool pulsed() const { return std::holds_alternative<PulseTrain>(modulation); }
  void validate() const;
};

struct NoiseBudget {
  double tau_th = 0.0;
  double tau_sn = 0.0;
  double tau_dn = 0.0;
  double tau_ba = 0.0;
  double tau_min = 0.0;
  double p_min = 0.0;                 // W/rtHz
  std::optional<double> n_min;        // photons per pulse, pulsed beams only
  std::optional<double> rep_rate_hz;  // repetition rate used for n_min
};

/// tau = eta_conv * delta_l * P / omega_sig.
double torque_from_power(double power, double lambda_sig, double delta_l, double eta_conv);
double power_from_torque(double tau, double lambda_sig, double delta_l, double eta_conv);

/// Thermal noise-equivalent torque, N m/rtHz.
double tau_thermal(const device::MechanicalModeRecord& mode, double temperature_k);

/// Transmission of the dip model at probe detuning `detuning` (rad/s).
double transmission(const OpticalReadout& readout, double detuning);
/// dT/dDelta at `detuning`, per rad/s.
double transmission_slope_at(const OpticalReadout& readout, double detuning);
/// Detuning of steepest slope, kappa / (2 sqrt 3).
double max_slope_detuning(const OpticalReadout& readout);
/// Steepest |dT/dDelta| = (3 sqrt 3 / 4) d / kappa.
double transmission_slope(const OpticalReadout& readout);

/// Shot-noise power spectral density 2 hbar omega0 P_det / eta_qe, W^2/Hz.
double shot_noise_psd(const OpticalReadout& readout);

double tau_shot(const device::MechanicalModeRecord& mode, const OpticalReadout& readout);
double tau_detector(const device::MechanicalModeRecord& mode, const OpticalReadout& readout);
double tau_backaction(const device::MechanicalModeRecord& mode, const OpticalReadout& readout);

/// Full noise budget at the mode frequency. `bandwidth_hz` only enters n_min.
NoiseBudget budget(const device::MechanicalModeRecord& mode, const OpticalReadout& readout,
                   double temperature_k, const SignalBeam& beam, double bandwidth_hz = 1.0);

/// Resonant drive power of a short-pulse train, n hbar omega_c f_r.
double pulse_train_power(double photons, double lambda_sig, double rep_rate_hz);

/// Photons per pulse whose resonant drive equals tau_min * sqrt(bandwidth).
double min_photons_per_pulse(double tau_min, const SignalBeam& beam, double rep_rate_hz,
                             double bandwidth_hz = 1.0);

/// Readout operated at a different probe power: n_cav and P_det move together,
/// holding P_det / n_cav fixed.
OpticalReadout with_intracavity_photons(const OpticalReadout& readout, double n_cav);

struct NcavPoint {
  double n_cav = 0.0;
  double tau_min = 0.0;
  double n_min = 0.0;
};

struct NcavOptimum {
  double n_cav = 0.0;
  double n_min = 0.0;
  std::vector<NcavPoint> curve;
};

/// Evaluates the pulsed budget over a probe-power sweep and returns the
/// grid point with the fewest photons per pulse (ties resolve to the lowest index).
NcavOptimum optimize_ncav(const device::MechanicalModeRecord& mode, const OpticalReadout& readout,
                          double temperature_k, const SignalBeam& beam,
                          std::span<const double> n_cav_grid, double bandwidth_hz = 1.0);

/// OAM change on refraction, 0.5 (cos ti / cos tr + cos tr / cos ti) l, kept in this
/// symmetric form (it returns l for an undeflected beam).
double refractive_delta_l(double theta_i, double theta_r, int l);

inline constexpr const char* kBudgetHeader = "l_s_um,tau_th,tau_sn,tau_dn,tau_ba,tau_min,p_min_w,n_min";

void write_budget_row(std::ostream& out, double l_s_um, const NoiseBudget& b);

}  // namespace oam::noise
