#include "oam/coupled_mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "oam/constants.hpp"
#include "oam/csv.hpp"
#include "oam/error.hpp"

namespace oam::mech {

cplx susceptibility(double omega, double omega_i, double gamma_i) {
  const cplx inverse(omega_i * omega_i - omega * omega, -gamma_i * omega);
  if (inverse == cplx(0.0, 0.0)) {
    throw PoleError(fmt::format("undamped susceptibility evaluated on resonance (omega = {} rad/s)", omega));
  }
  return 1.0 / inverse;
}

CoupledOscillator::CoupledOscillator(const Params& p) : p_(p) {
  if (!(p.m1 > 0 && p.m2 > 0)) throw ValidationError("oscillator masses must be positive");
  if (!(p.omega1 > 0 && p.omega2 > 0)) throw ValidationError("natural frequencies must be positive");
  if (!(p.gamma1 >= 0 && p.gamma2 >= 0)) throw ValidationError("damping rates must be non-negative");
  if (!(p.g_m >= 0)) throw ValidationError("coupling rate must be non-negative");
  const double g4 = std::pow(p.g_m, 4);
  if (!(p.omega1 * p.omega1 * p.omega2 * p.omega2 > g4)) {
    throw ValidationError("coupling too strong: omega1^2 omega2^2 must exceed g_m^4");
  }
}

std::array<double, 4> CoupledOscillator::stiffness() const {
  const double g2 = p_.g_m * p_.g_m;
  return {p_.omega1 * p_.omega1, -std::sqrt(p_.m2 / p_.m1) * g2,
          -std::sqrt(p_.m1 / p_.m2) * g2, p_.omega2 * p_.omega2};
}

DrivenResponse driven_response(const CoupledOscillator& model, const DriveSpec& drive) {
  if (!(drive.force >= 0 && drive.omega >= 0)) {
    throw ValidationError("drive force and frequency must be non-negative");
  }
  const double w = drive.omega;
  const cplx d1(model.omega1() * model.omega1() - w * w, -model.gamma1() * w);
  const cplx d2(model.omega2() * model.omega2() - w * w, -model.gamma2() * w);
  const double g2 = model.g_m() * model.g_m();
  // (chi1 chi2)^-1 - g^4
  const cplx denom = d1 * d2 - g2 * g2;
  if (denom == cplx(0.0, 0.0)) {
    throw PoleError(fmt::format("undamped coupled response on an eigenfrequency ({} rad/s)", w));
  }
  DrivenResponse r;
  r.x2 = g2 * drive.force / (std::sqrt(model.m1() * model.m2()) * denom);
  // Back-substitution chi1 (F/m1 + sqrt(m2/m1) g^2 x2), simplified so it stays
  // finite when only the bare twist resonance is undamped.
  r.x1 = drive.force * d2 / (model.m1() * denom);
  return r;
}

ResponseCurve response_curve(const CoupledOscillator& model, double force,
                             std::span<const double> omega_grid) {
  for (std::size_t i = 1; i < omega_grid.size(); ++i) {
    if (!(omega_grid[i] > omega_grid[i - 1])) {
      throw ValidationError("frequency grid must be strictly increasing");
    }
  }
  ResponseCurve curve;
  curve.omega.assign(omega_grid.begin(), omega_grid.end());
  curve.x1.reserve(omega_grid.size());
  curve.x2.reserve(omega_grid.size());
  for (const double w : omega_grid) {
    const auto r = driven_response(model, {force, w});
    curve.x1.push_back(r.x1);
    curve.x2.push_back(r.x2);
  }
  return curve;
}

std::vector<std::size_t> find_peaks(std::span<const double> values) {
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] - values[i - 1] > 0 && values[i + 1] - values[i] <= 0) peaks.push_back(i);
  }
  return peaks;
}

std::vector<double> magnitudes(std::span<const cplx> values) {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](cplx v) { return std::abs(v); });
  return out;
}

HybridFrequencies hybrid_frequencies(double omega1, double omega2, double g_m) {
  const double a = omega1 * omega1;
  const double b = omega2 * omega2;
  const double g4 = std::pow(g_m, 4);
  const double half_diff = 0.5 * (a - b);
  const double upper2 = 0.5 * (a + b) + std::sqrt(half_diff * half_diff + g4);
  // Product of the roots is a b - g^4; avoids cancellation in the lower root.
  const double lower2 = (a * b - g4) / upper2;
  return {std::sqrt(lower2), std::sqrt(upper2)};
}

HybridFrequencies hybrid_frequencies(const CoupledOscillator& model) {
  return hybrid_frequencies(model.omega1(), model.omega2(), model.g_m());
}

BareFrequencies bare_from_hybrid(double lower, double upper, double g_m) {
  if (!(lower > 0 && upper >= lower)) {
    throw DomainError("hybrid frequencies must satisfy 0 < lower <= upper");
  }
  const double lo2 = lower * lower;
  const double hi2 = upper * upper;
  const double half_gap = 0.5 * (hi2 - lo2);
  const double disc = half_gap * half_gap - std::pow(g_m, 4);
  if (disc < 0) {
    throw DomainError("branch splitting is smaller than the coupling allows (g_m too large)");
  }
  const double mid = 0.5 * (lo2 + hi2);
  const double bare_hi2 = mid + std::sqrt(disc);
  const double bare_lo2 = (lo2 * hi2 + std::pow(g_m, 4)) / bare_hi2;
  return {std::sqrt(bare_lo2), std::sqrt(bare_hi2)};
}

namespace {

// Frequencies are fitted in units of 2*pi*1 MHz for conditioning.
constexpr double kFitScale = kTwoPi * 1e6;

struct FitState {
  // v = g^4, intercept, slope, omega2 (all in scaled units)
  Eigen::Vector4d theta;
};

struct Evaluation {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;
};

Evaluation evaluate(std::span<const AnticrossingPoint> data, const Eigen::Vector4d& th,
                    double reference_ls, bool want_jacobian) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Evaluation e;
  e.residual.resize(2 * n);
  if (want_jacobian) e.jacobian.setZero(2 * n, 4);
  const double v = th[0];
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = data[static_cast<std::size_t>(i)];
    const double dl = p.l_s_um - reference_ls;
    const double w1 = th[1] + th[2] * dl;
    const double a = w1 * w1;
    const double b = th[3] * th[3];
    const double delta = 0.5 * (a - b);
    const double r = std::max(std::sqrt(delta * delta + v), 1e-300);
    const double plus2 = 0.5 * (a + b) + r;
    const double minus2 = std::max(0.5 * (a + b) - r, 0.0);
    const double wp = std::sqrt(plus2);
    const double wm = std::sqrt(minus2);
    e.residual[2 * i] = wm - p.omega_minus / kFitScale;
    e.residual[2 * i + 1] = wp - p.omega_plus / kFitScale;
    if (!want_jacobian) continue;
    for (int branch = 0; branch < 2; ++branch) {
      const double sign = branch == 0 ? -1.0 : 1.0;
      const double w = branch == 0 ? wm : wp;
      const double inv = 1.0 / (2.0 * std::max(w, 1e-300));
      const double d_da = 0.5 + sign * delta / (2.0 * r);
      const double d_db = 0.5 - sign * delta / (2.0 * r);
      const auto row = 2 * i + branch;
      e.jacobian(row, 0) = sign / (2.0 * r) * inv;
      e.jacobian(row, 1) = d_da * 2.0 * w1 * inv;
      e.jacobian(row, 2) = d_da * 2.0 * w1 * dl * inv;
      e.jacobian(row, 3) = d_db * 2.0 * th[3] * inv;
    }
  }
  e.cost = e.residual.squaredNorm();
  return e;
}

GmFit to_result(const Eigen::Vector4d& th, double reference_ls, double cost, int iterations) {
  GmFit fit;
  fit.g_m = std::pow(std::max(th[0], 0.0), 0.25) * kFitScale;
  fit.omega1 = {th[1] * kFitScale, th[2] * kFitScale, reference_ls};
  fit.omega2 = th[3] * kFitScale;
  fit.residual_norm = std::sqrt(cost) * kFitScale;
  fit.iterations = iterations;
  return fit;
}

}  // namespace

GmFit fit_gm(std::span<const AnticrossingPoint> data, const LinearModel& omega1_initial,
             double omega2, const FitOptions& options) {
  if (data.size() < 3) {
    throw FitError(fmt::format("need at least 3 anti-crossing points, got {}", data.size()),
                   std::numeric_limits<double>::quiet_NaN());
  }
  for (const auto& p : data) {
    if (!(p.omega_minus > 0 && p.omega_plus >= p.omega_minus)) {
      throw ValidationError("anti-crossing points need 0 < omega_minus <= omega_plus");
    }
  }
  const double reference_ls =
      std::accumulate(data.begin(), data.end(), 0.0, [](double s, const auto& p) { return s + p.l_s_um; }) /
      static_cast<double>(data.size());

  Eigen::Vector4d th;
  const double w1_ref = omega1_initial(reference_ls);
  th << 0.0, w1_ref / kFitScale, omega1_initial.slope / kFitScale, omega2 / kFitScale;

  // Start the coupling from the narrowest splitting in the data.
  double min_gap2 = std::numeric_limits<double>::infinity();
  for (const auto& p : data) {
    const double w_p = p.omega_plus / kFitScale;
    const double w_m = p.omega_minus / kFitScale;
    min_gap2 = std::min(min_gap2, 0.5 * (w_p * w_p - w_m * w_m));
  }
  th[0] = min_gap2 * min_gap2;

  const bool split_free = std::all_of(data.begin(), data.end(), [](const auto& p) {
    return p.omega_plus - p.omega_minus <= 1e-12 * p.omega_plus;
  });
  if (split_free) {
    // Degenerate branches: no coupling to resolve, fit a flat line.
    double mean = 0.0;
    for (const auto& p : data) mean += 0.5 * (p.omega_minus + p.omega_plus);
    mean /= static_cast<double>(data.size());
    th << 0.0, mean / kFitScale, 0.0, mean / kFitScale;
    return to_result(th, reference_ls, evaluate(data, th, reference_ls, false).cost, 0);
  }

  const int free_params = options.fit_omega2 ? 4 : 3;
  auto current = evaluate(data, th, reference_ls, true);
  double lambda = 1e-3;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::MatrixXd jac = current.jacobian.leftCols(free_params);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * current.residual;

    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd lhs = jtj;
      for (int k = 0; k < free_params; ++k) lhs(k, k) += lambda * std::max(jtj(k, k), 1e-30);
      const Eigen::VectorXd step = lhs.ldlt().solve(-grad);
      Eigen::Vector4d trial = th;
      trial.head(free_params) += step;
      trial[0] = std::max(trial[0], 0.0);
      auto next = evaluate(data, trial, reference_ls, true);
      if (std::isfinite(next.cost) && next.cost <= current.cost) {
        const double change = (trial - th).norm();
        const double improvement = current.cost - next.cost;
        th = trial;
        current = std::move(next);
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (change <= 1e-14 * (th.norm() + 1e-14) ||
            improvement <= options.tolerance * current.cost || current.cost < 1e-30) {
          return to_result(th, reference_ls, current.cost, iter);
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No downhill direction left at this precision: a stationary point.
      return to_result(th, reference_ls, current.cost, iter);
    }
  }
  throw FitError(fmt::format("g_m fit did not converge in {} iterations", options.max_iterations),
                 std::sqrt(current.cost) * kFitScale);
}

GmFit fit_gm(std::span<const AnticrossingPoint> data) {
  if (data.size() < 3) {
    throw FitError(fmt::format("need at least 3 anti-crossing points, got {}", data.size()),
                   std::numeric_limits<double>::quiet_NaN());
  }
  // The narrowest gap marks the crossing; its midpoint estimates omega2.
  const auto narrow = std::min_element(data.begin(), data.end(), [](const auto& a, const auto& b) {
    return a.omega_plus - a.omega_minus < b.omega_plus - b.omega_minus;
  });
  const double omega2 = 0.5 * (narrow->omega_minus + narrow->omega_plus);

  // Away from the crossing the branch farther from omega2 is the twist mode.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (auto it = data.begin(); it != data.end(); ++it) {
    if (it == narrow) continue;
    const double twist = std::abs(it->omega_plus - omega2) > std::abs(it->omega_minus - omega2)
                             ? it->omega_plus
                             : it->omega_minus;
    sx += it->l_s_um;
    sy += twist;
    sxx += it->l_s_um * it->l_s_um;
    sxy += it->l_s_um * twist;
    ++count;
  }
  const double nn = static_cast<double>(count);
  const double denom = nn * sxx - sx * sx;
  LinearModel initial;
  initial.reference_ls = sx / nn;
  initial.slope = denom != 0.0 ? (nn * sxy - sx * sy) / denom : 0.0;
  initial.intercept = sy / nn;
  FitOptions options;
  options.fit_omega2 = true;
  return fit_gm(data, initial, omega2, options);
}

cplx torque_to_displacement(const device::MechanicalModeRecord& mode, double tau, double omega) {
  const cplx denom(mode.omega_m * mode.omega_m - omega * omega, omega * mode.omega_m / mode.q_m);
  return tau / (mode.m_eff * mode.r_eff * denom);
}

double optomechanical_shift(const device::MechanicalModeRecord& mode, double tau, double omega) {
  return mode.g_om * std::abs(torque_to_displacement(mode, tau, omega));
}

void write_response_curve(const ResponseCurve& curve, std::ostream& out) {
  out << kResponseCurveHeader << '\n';
  for (std::size_t i = 0; i < curve.omega.size(); ++i) {
    out << csv::join({csv::format_double(curve.omega[i] / kTwoPi), csv::format_double(std::abs(curve.x1[i])),
                      csv::format_double(std::arg(curve.x1[i])), csv::format_double(std::abs(curve.x2[i])),
                      csv::format_double(std::arg(curve.x2[i]))})
        << '\n';
  }
}

}  // namespace oam::mech
