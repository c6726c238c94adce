#include "oam/noise_budget.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "oam/constants.hpp"
#include "oam/csv.hpp"
#include "oam/error.hpp"

namespace oam::noise {

double OpticalReadout::omega0() const { return angular_frequency(lambda0); }

double OpticalReadout::kappa() const { return omega0() / q_o; }

void OpticalReadout::validate() const {
  if (!(lambda0 > 0 && q_o > 0 && p_det > 0)) {
    throw ValidationError("readout wavelength, Q_o and P_det must be positive");
  }
  if (!(dip_depth > 0 && dip_depth <= 1)) throw ValidationError("dip depth must lie in (0, 1]");
  if (!(eta_qe > 0 && eta_qe <= 1)) throw ValidationError("quantum efficiency must lie in (0, 1]");
  if (!(p_dn >= 0)) throw ValidationError("detector NEP must be non-negative");
  if (!(n_cav >= 0)) throw ValidationError("intracavity photon number must be non-negative");
}

void SignalBeam::validate() const {
  if (!(lambda_sig > 0)) throw ValidationError("signal wavelength must be positive");
  if (!(delta_l >= 0)) throw ValidationError("OAM change must be non-negative");
  if (!(eta_conv > 0 && eta_conv <= 1)) throw ValidationError("conversion efficiency must lie in (0, 1]");
  if (!(contrast > 0 && contrast <= 1)) throw ValidationError("modulation contrast must lie in (0, 1]");
  if (const auto* pulses = std::get_if<PulseTrain>(&modulation)) {
    if (!(pulses->rep_rate_hz >= 0 && pulses->photons >= 0)) {
      throw ValidationError("pulse train rate and photon number must be non-negative");
    }
  }
}

double torque_from_power(double power, double lambda_sig, double delta_l, double eta_conv) {
  return eta_conv * delta_l * power / angular_frequency(lambda_sig);
}

double power_from_torque(double tau, double lambda_sig, double delta_l, double eta_conv) {
  const double per_watt = eta_conv * delta_l;
  if (!(per_watt > 0)) throw DomainError("no torque per watt: delta_l * eta_conv must be positive");
  return tau * angular_frequency(lambda_sig) / per_watt;
}

double tau_thermal(const device::MechanicalModeRecord& mode, double temperature_k) {
  if (!(temperature_k >= 0)) throw ValidationError("temperature must be non-negative");
  return std::sqrt(4.0 * kBoltzmann * temperature_k * mode.omega_m * mode.m_eff * mode.r_eff *
                   mode.r_eff / mode.q_m);
}

double transmission(const OpticalReadout& readout, double detuning) {
  const double u = 2.0 * detuning / readout.kappa();
  return 1.0 - readout.dip_depth / (1.0 + u * u);
}

double transmission_slope_at(const OpticalReadout& readout, double detuning) {
  const double kappa = readout.kappa();
  const double u = 2.0 * detuning / kappa;
  const double s = 1.0 + u * u;
  return readout.dip_depth * 4.0 * u / (kappa * s * s);
}

double max_slope_detuning(const OpticalReadout& readout) {
  return readout.kappa() / (2.0 * std::sqrt(3.0));
}

double transmission_slope(const OpticalReadout& readout) {
  return 3.0 * std::sqrt(3.0) / 4.0 * readout.dip_depth / readout.kappa();
}

double shot_noise_psd(const OpticalReadout& readout) {
  return 2.0 * kHbar * readout.omega0() * readout.p_det / readout.eta_qe;
}

namespace {

// Torque per unit detected-power fluctuation, m_eff w^2 r_eff / (|dT/dD| Q_m P_det g_OM).
double torque_per_power_noise(const device::MechanicalModeRecord& mode, const OpticalReadout& readout) {
  if (!(mode.g_om > 0)) {
    throw DomainError("mode has no optomechanical coupling; readout noise is unbounded");
  }
  return mode.m_eff * mode.omega_m * mode.omega_m * mode.r_eff /
         (transmission_slope(readout) * mode.q_m * readout.p_det * mode.g_om);
}

}  // namespace

double tau_shot(const device::MechanicalModeRecord& mode, const OpticalReadout& readout) {
  return torque_per_power_noise(mode, readout) * std::sqrt(shot_noise_psd(readout));
}

double tau_detector(const device::MechanicalModeRecord& mode, const OpticalReadout& readout) {
  return torque_per_power_noise(mode, readout) * readout.p_dn;
}

double tau_backaction(const device::MechanicalModeRecord& mode, const OpticalReadout& readout) {
  return 2.0 * kHbar * mode.g_om * mode.r_eff * std::sqrt(readout.n_cav / readout.kappa());
}

NoiseBudget budget(const device::MechanicalModeRecord& mode, const OpticalReadout& readout,
                   double temperature_k, const SignalBeam& beam, double bandwidth_hz) {
  mode.validate();
  readout.validate();
  beam.validate();
  NoiseBudget b;
  b.tau_th = tau_thermal(mode, temperature_k);
  b.tau_sn = tau_shot(mode, readout);
  b.tau_dn = tau_detector(mode, readout);
  b.tau_ba = tau_backaction(mode, readout);
  b.tau_min = std::sqrt(b.tau_th * b.tau_th + b.tau_sn * b.tau_sn + b.tau_dn * b.tau_dn +
                        b.tau_ba * b.tau_ba);
  b.p_min = power_from_torque(b.tau_min, beam.lambda_sig, beam.delta_l, beam.eta_conv) / beam.contrast;
  if (const auto* pulses = std::get_if<PulseTrain>(&beam.modulation)) {
    const double rate = pulses->rep_rate_hz > 0 ? pulses->rep_rate_hz : mode.omega_m / kTwoPi;
    b.rep_rate_hz = rate;
    b.n_min = min_photons_per_pulse(b.tau_min, beam, rate, bandwidth_hz);
  }
  return b;
}

double pulse_train_power(double photons, double lambda_sig, double rep_rate_hz) {
  return photons * kHbar * angular_frequency(lambda_sig) * rep_rate_hz;
}

double min_photons_per_pulse(double tau_min, const SignalBeam& beam, double rep_rate_hz,
                             double bandwidth_hz) {
  if (!(rep_rate_hz > 0)) throw ValidationError("repetition rate must be positive");
  if (!(bandwidth_hz > 0)) throw ValidationError("measurement bandwidth must be positive");
  const double per_photon = beam.eta_conv * beam.delta_l * beam.contrast * kHbar * rep_rate_hz;
  if (!(per_photon > 0)) throw DomainError("no torque per photon: delta_l * eta_conv must be positive");
  return tau_min * std::sqrt(bandwidth_hz) / per_photon;
}

OpticalReadout with_intracavity_photons(const OpticalReadout& readout, double n_cav) {
  if (!(readout.n_cav > 0 && n_cav > 0)) {
    throw ValidationError("probe-power scaling needs positive intracavity photon numbers");
  }
  OpticalReadout out = readout;
  out.p_det = readout.p_det * (n_cav / readout.n_cav);
  out.n_cav = n_cav;
  return out;
}

NcavOptimum optimize_ncav(const device::MechanicalModeRecord& mode, const OpticalReadout& readout,
                          double temperature_k, const SignalBeam& beam,
                          std::span<const double> n_cav_grid, double bandwidth_hz) {
  if (n_cav_grid.empty()) throw ValidationError("n_cav grid is empty");
  SignalBeam pulsed = beam;
  if (!pulsed.pulsed()) pulsed.modulation = PulseTrain{};

  NcavOptimum best;
  best.curve.reserve(n_cav_grid.size());
  for (const double n : n_cav_grid) {
    if (!(n > 0)) throw ValidationError("n_cav grid values must be positive");
    const auto b = budget(mode, with_intracavity_photons(readout, n), temperature_k, pulsed, bandwidth_hz);
    best.curve.push_back({n, b.tau_min, *b.n_min});
    if (best.curve.size() == 1 || *b.n_min < best.n_min) {
      best.n_min = *b.n_min;
      best.n_cav = n;
    }
  }
  return best;
}

double refractive_delta_l(double theta_i, double theta_r, int l) {
  constexpr double kRightAngle = kPi / 2.0;
  if (!(theta_i >= 0 && theta_i < kRightAngle && theta_r >= 0 && theta_r < kRightAngle)) {
    throw DomainError("incidence and refraction angles must lie in [0, pi/2)");
  }
  const double ci = std::cos(theta_i);
  const double cr = std::cos(theta_r);
  return 0.5 * (ci / cr + cr / ci) * static_cast<double>(l);
}

void write_budget_row(std::ostream& out, double l_s_um, const NoiseBudget& b) {
  out << csv::join({csv::format_double(l_s_um), csv::format_double(b.tau_th), csv::format_double(b.tau_sn),
                    csv::format_double(b.tau_dn), csv::format_double(b.tau_ba), csv::format_double(b.tau_min),
                    csv::format_double(b.p_min), b.n_min ? csv::format_double(*b.n_min) : std::string{}})
      << '\n';
}

}  // namespace oam::noise
