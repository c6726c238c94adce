// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "oam/beam_optics.hpp"
#include "oam/cli.hpp"
#include "oam/coupled_mechanics.hpp"
#include "oam/noise_budget.hpp"
#include "oam/swg_design.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace oam;

namespace {

constexpr double two_pi = 2 * std::numbers::pi;
constexpr double MHz = two_pi * 1e6;

// Restated so the checks do not lean on the library's constants.
constexpr double c0 = 2.99792458e8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

cli::Config preset(std::string_view name) {
  auto c = cli::Config::defaults();
  c.merge(cli::Config::preset(name));
  return c;
}

cli::RunContext context(cli::Config cfg, const char* name) {
  cli::RunContext ctx;
  ctx.config = std::move(cfg);
  ctx.out_dir = test::scratch(name);
  return ctx;
}

Outcome power_conversion() {
  const double tau = 3.22e-21, lambda = 840e-9, eta = 0.83;
  const double p = noise::power_from_torque(tau, lambda, 1, eta);
  const double hand = tau * (two_pi * c0 / lambda) / eta;
  const bool ok = test::rel_err(p, 8.70e-6) < 0.01 && test::rel_err(p, hand) < 1e-14;
  return {ok, fmt::format("P_min = {:.4g} W/rtHz (target 8.70e-6, hand {:.4g})", p, hand)};
}

Outcome headline_budget() {
  const auto r = cli::run_noise_sweep(context(preset("paper-fig5"), "acc_fig5"));
  const double tau = r.operating.budget.tau_min;
  const bool ok = test::rel_err(tau, 3.22e-21) < 0.05 && std::abs(r.argmin.l_s_um - 10) <= 0.5;
  return {ok, fmt::format("tau_min = {:.4g} N m/rtHz at l_s = {} um, argmin l_s = {} um", tau,
                          r.operating.l_s_um, r.argmin.l_s_um)};
}

Outcome pulsed_photons() {
  const auto r = cli::run_pulse_budget(context(preset("paper-fig8"), "acc_fig8"));
  const bool ok = r.n_min >= 3.9e3 / 2 && r.n_min <= 3.9e3 * 2 && r.interior_ncav_minimum;
  return {ok, fmt::format("n_min = {:.4g} (target 3.9e3 within x2), n_cav optimum {:.3g}, interior = {}", r.n_min,
                          r.vs_ncav.n_cav, r.interior_ncav_minimum)};
}

Outcome mechanics_oracle() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> uf(1.0, 10.0), um(-12.0, -10.0), uq(20.0, 200.0), ug(0.0, 0.6),
      ud(0.6, 1.4);
  double worst_amp = 0, worst_phase = 0;
  for (int trial = 0; trial < 50; ++trial) {
    oracle::TwoModeParams o{};
    o.m1 = std::pow(10.0, um(rng));
    o.m2 = std::pow(10.0, um(rng));
    o.omega1 = uf(rng) * MHz;
    o.omega2 = uf(rng) * MHz;
    o.gamma1 = o.omega1 / uq(rng);
    o.gamma2 = o.omega2 / uq(rng);
    o.g = ug(rng) * std::sqrt(o.omega1 * o.omega2);
    const mech::CoupledOscillator m({o.m1, o.m2, o.omega1, o.omega2, o.gamma1, o.gamma2, o.g});
    const auto h = mech::hybrid_frequencies(m);
    const double w = ud(rng) * (trial % 2 ? h.upper : h.lower);
    const auto fd = mech::driven_response(m, {1e-12, w});
    const auto td = oracle::rk4_steady_state(o, 1e-12, w);
    worst_amp = std::max({worst_amp, test::rel_err(std::abs(fd.x1), std::abs(td.x1)),
                          test::rel_err(std::abs(fd.x2), std::abs(td.x2))});
    worst_phase = std::max(worst_phase, std::abs(std::arg(fd.x1 / td.x1)));
    if (o.g > 0) worst_phase = std::max(worst_phase, std::abs(std::arg(fd.x2 / td.x2)));
  }
  return {worst_amp < 1e-3 && worst_phase < 1e-3,
          fmt::format("50 models: worst amplitude error {:.2e}, worst phase error {:.2e} rad", worst_amp,
                      worst_phase)};
}

Outcome anticrossing_algebra() {
  double worst_split = 0;
  for (const double g : {0.1, 0.7, 1.5, 2.5}) {
    const double w0 = 5.0 * MHz;
    const auto h = mech::hybrid_frequencies(w0, w0, g * MHz);
    const double split = h.upper * h.upper - h.lower * h.lower;
    worst_split = std::max(worst_split, std::abs(split - 2 * g * g * MHz * MHz) / (w0 * w0));
  }
  // Noiseless synthetic sweep from the closed-form eigenvalues.
  const double g = 1.5 * MHz, w2 = 5.9 * MHz;
  const mech::LinearModel w1{5.9 * MHz, -0.55 * MHz, 10.0};
  std::vector<mech::AnticrossingPoint> data;
  for (int k = 0; k <= 20; ++k) {
    const double l = 8.0 + 0.2 * k;
    const double a = w1(l) * w1(l), b = w2 * w2;
    const double disc = std::sqrt(0.25 * (a - b) * (a - b) + std::pow(g, 4));
    data.push_back({l, std::sqrt(0.5 * (a + b) - disc), std::sqrt(0.5 * (a + b) + disc)});
  }
  const auto fit = mech::fit_gm(data);
  const double err = std::max(test::rel_err(fit.g_m, g), test::rel_err(fit.omega2, w2));
  const bool ok = worst_split <= 16 * std::numeric_limits<double>::epsilon() && err < 1e-6;
  return {ok, fmt::format("splitting error {:.1e} (relative to omega^2), fit_gm error {:.1e}", worst_split, err)};
}

Outcome two_peaks() {
  const auto cfg = preset("paper-fig2b");
  const double step = cfg.number("mechanics.f_step_hz");
  const auto r = cli::run_mech_response(context(cfg, "acc_fig2b"));
  if (r.x2_peaks.size() != 2) return {false, fmt::format("{} |x2| peaks found", r.x2_peaks.size())};
  const double a = r.x2_peaks[0].omega_hz, b = r.x2_peaks[1].omega_hz;
  const bool ok = std::abs(a - 4.81e6) <= step && std::abs(b - 5.96e6) <= step;
  return {ok, fmt::format("|x2| peaks at {:.1f} Hz and {:.1f} Hz (grid step {} Hz)", a, b, step)};
}

double second_moment_radius(const optics::ComplexGrid& f) {
  double num = 0, den = 0;
  for (int r = 0; r < f.n(); ++r)
    for (int c = 0; c < f.n(); ++c) {
      const double x = f.coordinate(c), y = f.coordinate(r), p = std::norm(f.at(r, c));
      num += (x * x + y * y) * p;
      den += p;
    }
  return std::sqrt(2 * num / den);  // 1/e^2 intensity radius for a Gaussian
}

Outcome beam_oracles() {
  const double lambda = 840e-9;
  const int n = 1024;

  // Unitarity: a band-limited LG mode keeps its power.
  const auto lg = optics::make_lg(n, 0.1e-6, lambda, {1, 2, 8e-6});
  optics::PropagationReport rep;
  const auto far = optics::propagate(lg, 100e-6, &rep);
  const double unitarity = std::abs(far.power() / lg.power() - 1);

  const double w0 = 20e-6;
  const auto g = optics::make_gaussian(n, 0.25e-6, lambda, w0);
  const double z_r = std::numbers::pi * w0 * w0 / lambda;
  const double w = second_moment_radius(optics::propagate(g, z_r));
  const double expansion = test::rel_err(w, oracle::gaussian_radius(w0, lambda, z_r));

  const double wv = 5e-6, pitch = 50e-9;
  const auto vortex = optics::apply_mask(optics::make_gaussian(n, pitch, lambda, wv), optics::vortex_mask(n, pitch, 1));
  const double f = optics::fidelity(vortex, optics::make_lg(n, pitch, lambda, {0, 1, wv}));
  const double quad = oracle::vortex_gaussian_fidelity(1, wv, wv);
  const double quarter = std::numbers::pi / 4;

  const bool ok = rep.band_limited && unitarity < 1e-10 && expansion < 0.01 && std::abs(f - quarter) <= 0.01 &&
                  std::abs(f - quad) <= 0.01;
  return {ok, fmt::format("unitarity {:.1e}, w(z_R) error {:.2e}, F = {:.4f} (radial quadrature {:.4f}, pi/4 {:.4f})",
                          unitarity, expansion, f, quad, quarter)};
}

Outcome swg_fidelity() {
  const swg::SWGDesign design;  // delta_l = 1 at 840 nm
  const swg::BeamOptions opts;
  const auto curve = swg::fidelity_vs_wavelength(design, {design.design_lambda}, opts);
  const auto& m = curve.front().metrics;

  const auto g = optics::make_gaussian(opts.n, opts.pitch, design.design_lambda, opts.w0);
  const auto stair = optics::apply_mask(g, optics::staircase_vortex_mask(opts.n, opts.pitch, 1, 11));
  const double purity = optics::azimuthal_spectrum(stair, -30, 30).at(1);

  const bool ok = std::abs(m.fidelity - 0.90) <= 0.10 && std::abs(m.efficiency - 0.83) <= 0.10 && purity >= 0.95;
  return {ok, fmt::format("F = {:.4f}, T_swg = {:.4f}, eta = {:.4f}; staircase purity {:.4f} (sinc^2(pi/11) = {:.4f})",
                          m.fidelity, m.transmission, m.efficiency, purity, oracle::staircase_purity(11))};
}

Outcome budget_identities() {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto logu = [&](double lo, double hi) { return std::pow(10.0, lo + (hi - lo) * u(rng)); };
  double worst_quad = 0, worst_scale = 0;
  auto scale_err = [&](double got, double want) { worst_scale = std::max(worst_scale, test::rel_err(got, want)); };
  for (int trial = 0; trial < 500; ++trial) {
    device::MechanicalModeRecord m;
    m.geometry = {10.0, 7.0, 1.0};
    m.omega_m = two_pi * logu(5, 8);
    m.m_eff = logu(-16, -9);
    m.r_eff = logu(-7, -4);
    m.q_m = logu(2, 9);
    m.g_om = two_pi * logu(17, 21);
    noise::OpticalReadout r;
    r.lambda0 = 1e-6 + 1e-6 * u(rng);
    r.q_o = logu(3, 7);
    r.dip_depth = 0.1 + 0.9 * u(rng);
    r.p_det = logu(-10, -4);
    r.eta_qe = 0.1 + 0.9 * u(rng);
    r.p_dn = logu(-18, -11);
    r.n_cav = logu(-6, 2);
    const double T = logu(-3, 2.5);
    noise::SignalBeam beam;
    beam.delta_l = 1 + std::floor(20 * u(rng));
    beam.eta_conv = 0.1 + 0.9 * u(rng);

    const auto b = noise::budget(m, r, T, beam);
    const double sum = b.tau_th * b.tau_th + b.tau_sn * b.tau_sn + b.tau_dn * b.tau_dn + b.tau_ba * b.tau_ba;
    worst_quad = std::max(worst_quad, test::rel_err(b.tau_min * b.tau_min, sum));

    const double k = logu(-1, 1);
    scale_err(noise::budget(m, r, k * T, beam).tau_th, std::sqrt(k) * b.tau_th);
    auto mq = m;
    mq.q_m *= k;
    const auto bq = noise::budget(mq, r, T, beam);
    scale_err(bq.tau_th, b.tau_th / std::sqrt(k));
    scale_err(bq.tau_sn, b.tau_sn / k);
    scale_err(bq.tau_dn, b.tau_dn / k);
    scale_err(bq.tau_ba, b.tau_ba);
    auto rn = r;
    rn.n_cav *= k;
    const auto bn = noise::budget(m, rn, T, beam);
    scale_err(bn.tau_ba, std::sqrt(k) * b.tau_ba);
    scale_err(bn.tau_sn, b.tau_sn);
    auto mr = m;
    mr.r_eff *= k;
    const auto br = noise::budget(mr, r, T, beam);
    scale_err(br.tau_min, k * b.tau_min);
    scale_err(br.tau_th, k * b.tau_th);
    scale_err(br.tau_ba, k * b.tau_ba);
  }
  return {worst_quad < 1e-12 && worst_scale < 1e-12,
          fmt::format("500 draws: quadrature error {:.1e}, worst scaling error {:.1e}", worst_quad, worst_scale)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"torque-power conversion", power_conversion},
      {"headline noise budget", headline_budget},
      {"pulsed photon number", pulsed_photons},
      {"mechanics time-domain oracle", mechanics_oracle},
      {"anti-crossing algebra", anticrossing_algebra},
      {"two-peak response", two_peaks},
      {"beam-optics oracles", beam_oracles},
      {"SWG model fidelity", swg_fidelity},
      {"noise-budget identities", budget_identities},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    fmt::print("{} [{}] {}: {} ({:.0f} ms)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail, ms);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
