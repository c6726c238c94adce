#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "oam/cli.hpp"
#include "oam/constants.hpp"
#include "oam/csv.hpp"
#include "oam/error.hpp"
#include "oam/parallel.hpp"

namespace oam::cli {

namespace {

using device::Branch;

template <typename... Args>
void say(const RunContext& ctx, fmt::format_string<Args...> f, Args&&... args) {
  if (ctx.log) *ctx.log << fmt::format(f, std::forward<Args>(args)...) << '\n';
}

std::filesystem::path output_path(const RunContext& ctx, const char* name) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", ctx.out_dir.string(), ec.message()));
  return ctx.out_dir / name;
}

device::DeviceDataset dataset_from(const Config& cfg) {
  if (!cfg.is_set("device.dataset")) throw ConfigError("missing required key 'device.dataset'");
  return device::load_dataset(cfg.path("device.dataset"));
}

Branch branch_from(const Config& cfg) {
  const auto b = device::parse_branch(cfg.string("device.branch"));
  if (!b) throw ConfigError(fmt::format("key 'device.branch': unknown branch '{}'", cfg.string("device.branch")));
  return *b;
}

noise::OpticalReadout readout_from(const Config& cfg) {
  noise::OpticalReadout r;
  r.lambda0 = cfg.number("readout.lambda0_m");
  r.q_o = cfg.number("readout.q_o");
  r.dip_depth = cfg.number("readout.dip_depth");
  r.p_det = cfg.number("readout.p_det_w");
  r.eta_qe = cfg.number("readout.eta_qe");
  r.p_dn = cfg.number("readout.p_dn_w_per_rthz");
  r.n_cav = cfg.number("readout.n_cav");
  r.validate();
  return r;
}

noise::SignalBeam signal_from(const Config& cfg) {
  noise::SignalBeam b;
  b.lambda_sig = cfg.number("signal.lambda_m");
  b.delta_l = cfg.number("signal.delta_l");
  b.eta_conv = cfg.number("signal.eta_conv");
  b.contrast = cfg.number("signal.contrast");
  const std::string mode = cfg.string("signal.mode");
  if (mode == "pulsed") {
    b.modulation = noise::PulseTrain{cfg.number("signal.rep_rate_hz"), 0.0};
  } else if (mode == "cw") {
    b.modulation = noise::CwModulation{};
  } else {
    throw ConfigError(fmt::format("key 'signal.mode': expected 'cw' or 'pulsed', got '{}'", mode));
  }
  b.validate();
  return b;
}

// Sweep domain of a branch; twist/bounce-like requests on a hybrid-only table
// span the hybrid knots.
std::pair<double, double> branch_domain(const device::DeviceDataset& ds, Branch b) {
  if (ds.has_branch(b)) return ds.domain(b);
  return ds.domain(Branch::hybrid_lower);
}

std::vector<double> ls_grid(const Config& cfg, const device::DeviceDataset& ds, Branch b) {
  const auto [lo_d, hi_d] = branch_domain(ds, b);
  const double lo = cfg.optional_number("sweep.l_s_min_um").value_or(lo_d);
  const double hi = cfg.optional_number("sweep.l_s_max_um").value_or(hi_d);
  const double step = cfg.number("sweep.l_s_step_um");
  if (!(step > 0)) throw ConfigError("key 'sweep.l_s_step_um' must be positive");
  if (!(hi >= lo)) throw ConfigError("sweep l_s range is empty");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = lo + static_cast<double>(k) * step;
  return grid;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0 && hi > lo) || points < 2) throw ConfigError("n_cav sweep needs 0 < min < max and >= 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < points; ++k) grid[k] = std::pow(10.0, a + (b - a) * k / (points - 1));
  return grid;
}

std::vector<NoiseSweepRow> sweep_budget(const device::DeviceDataset& ds, Branch branch, const std::vector<double>& grid,
                                        const std::optional<double>& q_m, const noise::OpticalReadout& readout,
                                        double temperature, const noise::SignalBeam& beam, double bandwidth) {
  return parallel_map(grid.size(), [&](std::size_t k) {
    const auto mode = device::interpolate(ds, branch, grid[k], q_m);
    return NoiseSweepRow{grid[k], noise::budget(mode, readout, temperature, beam, bandwidth)};
  });
}

void write_sweep(const std::filesystem::path& path, const std::vector<NoiseSweepRow>& rows) {
  csv::write_atomically(path, [&](std::ostream& out) {
    out << noise::kBudgetHeader << '\n';
    for (const auto& r : rows) noise::write_budget_row(out, r.l_s_um, r.budget);
  });
}

const NoiseSweepRow& argmin_tau(const std::vector<NoiseSweepRow>& rows) {
  return *std::min_element(rows.begin(), rows.end(),
                           [](const auto& a, const auto& b) { return a.budget.tau_min < b.budget.tau_min; });
}

void log_budget(const RunContext& ctx, const char* label, const NoiseSweepRow& r) {
  say(ctx, "{} l_s = {} um: tau_th = {:.4g}, tau_sn = {:.4g}, tau_dn = {:.4g}, tau_ba = {:.4g}", label, r.l_s_um,
      r.budget.tau_th, r.budget.tau_sn, r.budget.tau_dn, r.budget.tau_ba);
  say(ctx, "  tau_min = {:.4g} N m/rtHz, P_min = {:.4g} W/rtHz", r.budget.tau_min, r.budget.p_min);
  if (r.budget.n_min) say(ctx, "  n_min = {:.4g} photons/pulse at f_r = {:.6g} Hz", *r.budget.n_min, *r.budget.rep_rate_hz);
}

swg::SWGDesign design_from(const Config& cfg) {
  swg::SWGDesign d;
  d.aperture_d = cfg.number("swg.aperture_d_m");
  d.lattice_a = cfg.number("swg.lattice_a_m");
  d.pillar_t = cfg.number("swg.pillar_t_m");
  d.diameters_nm = cfg.numbers("swg.diameters_nm");
  d.delta_l = cfg.integer("swg.delta_l");
  d.design_lambda = cfg.number("swg.design_lambda_m");
  d.lookup = swg::default_lookup(d.design_lambda, d.diameters_nm.size(), cfg.boolean("swg.phase_increasing"));
  d.validate();
  return d;
}

std::vector<PeakRow> peak_rows(const mech::ResponseCurve& curve, const std::vector<double>& a1,
                               const std::vector<double>& a2, const std::vector<double>& which) {
  std::vector<PeakRow> rows;
  for (const auto k : mech::find_peaks(which)) rows.push_back({to_hz(curve.omega[k]), a1[k], a2[k]});
  return rows;
}

}  // namespace

MechResponseResult run_mech_response(const RunContext& ctx) {
  const Config& cfg = ctx.config;
  MechResponseResult res;
  const double g = to_angular(cfg.number("mechanics.g_m_hz"));
  if (!(g >= 0)) throw ConfigError("key 'mechanics.g_m_hz' must be non-negative");

  const auto o1 = cfg.optional_number("mechanics.omega1_hz");
  const auto o2 = cfg.optional_number("mechanics.omega2_hz");
  const auto m1 = cfg.optional_number("mechanics.m1_kg");
  const auto m2 = cfg.optional_number("mechanics.m2_kg");
  const auto q_override = cfg.optional_number("device.q_m");

  mech::CoupledOscillator::Params p;
  double q_m = 0.0;
  if (o1 && o2 && m1 && m2) {
    p.omega1 = to_angular(*o1);
    p.omega2 = to_angular(*o2);
    p.m1 = *m1;
    p.m2 = *m2;
    if (!q_override) throw ConfigError("missing required key 'device.q_m' (no dataset to take it from)");
    q_m = *q_override;
  } else {
    const auto ds = dataset_from(cfg);
    const double l_s = cfg.number("device.l_s_um");
    const auto lower = device::interpolate(ds, Branch::hybrid_lower, l_s, q_override);
    const auto upper = device::interpolate(ds, Branch::hybrid_upper, l_s, q_override);
    // The table holds hybridized branches; undo the coupling to get the bare pair.
    const auto bare = g > 0 ? mech::bare_from_hybrid(lower.omega_m, upper.omega_m, g)
                            : mech::BareFrequencies{lower.omega_m, upper.omega_m};
    const bool twist_is_lower = l_s >= device::anticrossing_center(ds);
    p.omega1 = twist_is_lower ? bare.twist : bare.bounce;
    p.omega2 = twist_is_lower ? bare.bounce : bare.twist;
    p.m1 = device::interpolate(ds, Branch::twist_like, l_s, q_override).m_eff;
    p.m2 = device::interpolate(ds, Branch::bounce_like, l_s, q_override).m_eff;
    q_m = lower.q_m;
    if (o1) p.omega1 = to_angular(*o1);
    if (o2) p.omega2 = to_angular(*o2);
    if (m1) p.m1 = *m1;
    if (m2) p.m2 = *m2;
  }
  if (!(q_m > 0)) throw ConfigError("mechanical quality factor must be positive");
  p.gamma1 = p.omega1 / q_m;
  p.gamma2 = p.omega2 / q_m;
  p.g_m = g;
  const mech::CoupledOscillator model(p);
  res.params = p;

  const double f_min = cfg.number("mechanics.f_min_hz");
  const double f_max = cfg.number("mechanics.f_max_hz");
  const double f_step = cfg.number("mechanics.f_step_hz");
  if (!(f_min > 0 && f_max > f_min && f_step > 0)) throw ConfigError("frequency grid needs 0 < f_min < f_max, f_step > 0");
  const auto count = static_cast<std::size_t>(std::floor((f_max - f_min) / f_step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = to_angular(f_min + static_cast<double>(k) * f_step);

  res.curve = mech::response_curve(model, cfg.number("mechanics.force_n"), grid);
  const auto a1 = mech::magnitudes(res.curve.x1);
  const auto a2 = mech::magnitudes(res.curve.x2);
  res.x1_peaks = peak_rows(res.curve, a1, a2, a1);
  res.x2_peaks = peak_rows(res.curve, a1, a2, a2);
  if (g == 0.0) res.warnings.push_back("g_m = 0: modes are uncoupled and x2 is identically zero");

  res.curve_file = output_path(ctx, "response_curve.csv");
  csv::write_atomically(res.curve_file, [&](std::ostream& out) { mech::write_response_curve(res.curve, out); });

  say(ctx, "bare modes: f1 = {:.6g} Hz, f2 = {:.6g} Hz, g_m = {:.6g} Hz, Q_m = {:.6g}", to_hz(p.omega1),
      to_hz(p.omega2), to_hz(g), q_m);
  say(ctx, "peaks of |x2|:");
  say(ctx, "  {:>14}  {:>12}  {:>12}", "f_hz", "abs_x1_m", "abs_x2_m");
  for (const auto& r : res.x2_peaks) say(ctx, "  {:>14.1f}  {:>12.4e}  {:>12.4e}", r.omega_hz, r.abs_x1, r.abs_x2);
  say(ctx, "peaks of |x1|:");
  for (const auto& r : res.x1_peaks) say(ctx, "  {:>14.1f}  {:>12.4e}  {:>12.4e}", r.omega_hz, r.abs_x1, r.abs_x2);
  for (const auto& w : res.warnings) say(ctx, "warning: {}", w);
  say(ctx, "wrote {}", res.curve_file.string());
  return res;
}

NoiseSweepResult run_noise_sweep(const RunContext& ctx) {
  const Config& cfg = ctx.config;
  const auto ds = dataset_from(cfg);
  const Branch branch = branch_from(cfg);
  const auto readout = readout_from(cfg);
  const auto beam = signal_from(cfg);
  const double temperature = cfg.number("environment.temperature_k");
  const double bandwidth = cfg.number("signal.bandwidth_hz");
  const auto q_m = cfg.optional_number("device.q_m");

  NoiseSweepResult res;
  res.rows = sweep_budget(ds, branch, ls_grid(cfg, ds, branch), q_m, readout, temperature, beam, bandwidth);
  res.argmin = argmin_tau(res.rows);
  const double l_op = cfg.number("device.l_s_um");
  res.operating = {l_op, noise::budget(device::interpolate(ds, branch, l_op, q_m), readout, temperature, beam, bandwidth)};

  res.sweep_file = output_path(ctx, "noise_sweep.csv");
  write_sweep(res.sweep_file, res.rows);
  log_budget(ctx, "argmin", res.argmin);
  log_budget(ctx, "operating point", res.operating);
  say(ctx, "wrote {}", res.sweep_file.string());
  return res;
}

PulseBudgetResult run_pulse_budget(const RunContext& ctx) {
  const Config& cfg = ctx.config;
  if (cfg.string("signal.mode") != "pulsed") {
    throw ConfigError("pulse-budget needs key 'signal.mode' = pulsed");
  }
  const auto ds = dataset_from(cfg);
  const Branch branch = branch_from(cfg);
  const auto readout = readout_from(cfg);
  const auto beam = signal_from(cfg);
  const double temperature = cfg.number("environment.temperature_k");
  const double bandwidth = cfg.number("signal.bandwidth_hz");
  const auto q_m = cfg.optional_number("device.q_m");

  PulseBudgetResult res;
  res.vs_ls = sweep_budget(ds, branch, ls_grid(cfg, ds, branch), q_m, readout, temperature, beam, bandwidth);
  res.best_ls = *std::min_element(res.vs_ls.begin(), res.vs_ls.end(),
                                  [](const auto& a, const auto& b) { return *a.budget.n_min < *b.budget.n_min; });

  const double l_op = cfg.number("device.l_s_um");
  const auto mode = device::interpolate(ds, branch, l_op, q_m);
  const auto grid = log_grid(cfg.number("sweep.n_cav_min"), cfg.number("sweep.n_cav_max"),
                             cfg.integer("sweep.n_cav_points"));
  res.vs_ncav = noise::optimize_ncav(mode, readout, temperature, beam, grid, bandwidth);
  res.rep_rate_hz = *noise::budget(mode, readout, temperature, beam, bandwidth).rep_rate_hz;
  res.interior_ncav_minimum = res.vs_ncav.n_cav > grid.front() && res.vs_ncav.n_cav < grid.back();
  res.n_min = std::min(*res.best_ls.budget.n_min, res.vs_ncav.n_min);

  res.ls_file = output_path(ctx, "pulse_vs_ls.csv");
  write_sweep(res.ls_file, res.vs_ls);
  res.ncav_file = output_path(ctx, "pulse_vs_ncav.csv");
  csv::write_atomically(res.ncav_file, [&](std::ostream& out) {
    out << "n_cav,tau_min,n_min\n";
    for (const auto& pt : res.vs_ncav.curve) {
      out << csv::join({csv::format_double(pt.n_cav), csv::format_double(pt.tau_min), csv::format_double(pt.n_min)})
          << '\n';
    }
  });

  log_budget(ctx, "best", res.best_ls);
  say(ctx, "n_cav optimum at l_s = {} um: n_cav = {:.4g}, n_min = {:.4g}{}", l_op, res.vs_ncav.n_cav,
      res.vs_ncav.n_min, res.interior_ncav_minimum ? "" : " (at the edge of the sweep)");
  say(ctx, "repetition rate {:.6g} Hz", res.rep_rate_hz);
  say(ctx, "n_min = {:.4g} photons per pulse", res.n_min);
  say(ctx, "wrote {} and {}", res.ls_file.string(), res.ncav_file.string());
  return res;
}

BeamSimResult run_beam_sim(const RunContext& ctx) {
  const Config& cfg = ctx.config;
  BeamSimResult res;
  const int n = cfg.integer("optics.n");
  const double pitch = cfg.number("optics.pitch_m");
  const double w0 = cfg.number("optics.w0_m");
  const double z = cfg.number("optics.z_eval_m");
  const double lambda = cfg.number("optics.lambda_m");
  const int stride = cfg.integer("optics.raster_stride");
  res.ideal_vortex = cfg.boolean("optics.ideal_vortex");
  const auto design = design_from(cfg);

  const auto input = optics::make_gaussian(n, pitch, lambda, w0);
  const optics::Mask mask = res.ideal_vortex
                                ? optics::vortex_mask(n, pitch, design.delta_l)
                                : swg::layout_to_mask(swg::generate_layout(design), n, pitch, lambda);
  const optics::LGIndex target{0, design.delta_l, w0};
  optics::ScalarField output(n, pitch, lambda);
  res.metrics = optics::conversion_metrics(input, mask, target, z, &output);
  res.spectrum = optics::azimuthal_spectrum(output, cfg.integer("optics.l_min"), cfg.integer("optics.l_max"));

  auto reference = optics::make_lg(n, pitch, lambda, {0, design.delta_l, res.metrics.best_waist});
  if (z != 0.0) reference = optics::propagate(reference, z);

  auto raster = [&](const char* name, const optics::ComplexGrid& g, optics::RasterKind kind) {
    const auto path = output_path(ctx, name);
    csv::write_atomically(path, [&](std::ostream& out) { optics::write_raster(g, kind, stride, out); });
    res.files.push_back(path);
  };
  raster("masked_intensity.csv", output, optics::RasterKind::intensity);
  raster("masked_phase.csv", output, optics::RasterKind::phase);
  raster("target_intensity.csv", reference, optics::RasterKind::intensity);
  raster("target_phase.csv", reference, optics::RasterKind::phase);

  const auto spectrum_path = output_path(ctx, "spectrum.csv");
  csv::write_atomically(spectrum_path, [&](std::ostream& out) {
    out << "l,fraction\n";
    for (int l = res.spectrum.l_min; l <= res.spectrum.l_max(); ++l) {
      out << l << ',' << csv::format_double(res.spectrum.at(l)) << '\n';
    }
  });
  res.files.push_back(spectrum_path);

  const auto metrics_path = output_path(ctx, "metrics.csv");
  csv::write_atomically(metrics_path, [&](std::ostream& out) {
    out << "fidelity,fidelity_fixed_waist,best_waist_m,transmission,efficiency\n";
    const auto& m = res.metrics;
    out << csv::join({csv::format_double(m.fidelity), csv::format_double(m.fidelity_fixed_waist),
                      csv::format_double(m.best_waist), csv::format_double(m.transmission),
                      csv::format_double(m.efficiency)})
        << '\n';
  });
  res.files.push_back(metrics_path);

  const auto lambdas = cfg.numbers("optics.lambda_sweep_m");
  if (!lambdas.empty()) {
    swg::BeamOptions opts{n, pitch, w0, z};
    res.wavelength_curve = swg::fidelity_vs_wavelength(design, lambdas, opts);
    const auto path = output_path(ctx, "fidelity_vs_wavelength.csv");
    csv::write_atomically(path, [&](std::ostream& out) {
      out << "lambda_m,fidelity,transmission,efficiency\n";
      for (const auto& pt : res.wavelength_curve) {
        out << csv::join({csv::format_double(pt.lambda), csv::format_double(pt.metrics.fidelity),
                          csv::format_double(pt.metrics.transmission), csv::format_double(pt.metrics.efficiency)})
            << '\n';
      }
    });
    res.files.push_back(path);
  }

  const auto& m = res.metrics;
  say(ctx, "{} mask, delta_l = {}, lambda = {:.4g} nm", res.ideal_vortex ? "ideal vortex" : "SWG", design.delta_l,
      lambda * 1e9);
  say(ctx, "F = {:.4f} (fixed waist {:.4f}, best waist {:.4g} um), T_swg = {:.4f}, eta = {:.4f}", m.fidelity,
      m.fidelity_fixed_waist, m.best_waist * 1e6, m.transmission, m.efficiency);
  say(ctx, "azimuthal spectrum (fractions >= 1e-3):");
  for (int l = res.spectrum.l_min; l <= res.spectrum.l_max(); ++l) {
    if (res.spectrum.at(l) >= 1e-3) say(ctx, "  l = {:>3}: {:.4f}", l, res.spectrum.at(l));
  }
  for (const auto& pt : res.wavelength_curve) {
    say(ctx, "  lambda = {:.1f} nm: F = {:.4f}", pt.lambda * 1e9, pt.metrics.fidelity);
  }
  return res;
}

SwgGenResult run_swg_gen(const RunContext& ctx) {
  const auto design = design_from(ctx.config);
  SwgGenResult res;
  res.layout = swg::generate_layout(design);
  res.histogram = swg::diameter_histogram(res.layout);
  res.layout_file = output_path(ctx, "layout.csv");
  swg::export_layout(res.layout, res.layout_file);
  res.histogram_file = output_path(ctx, "diameter_histogram.csv");
  csv::write_atomically(res.histogram_file, [&](std::ostream& out) {
    out << "diameter_nm,count\n";
    for (std::size_t k = 0; k < res.histogram.size(); ++k) {
      out << csv::format_double(design.diameters_nm[k]) << ',' << res.histogram[k] << '\n';
    }
  });

  const double area_estimate =
      kPi * design.aperture_d * design.aperture_d / 4.0 / (std::sqrt(3.0) / 2.0 * design.lattice_a * design.lattice_a);
  say(ctx, "{} pillar sites (area estimate {:.0f}), delta_l = {}", res.layout.sites.size(), area_estimate,
      design.delta_l);
  for (std::size_t k = 0; k < res.histogram.size(); ++k) {
    say(ctx, "  {:>5g} nm: {}", design.diameters_nm[k], res.histogram[k]);
  }
  say(ctx, "wrote {}", res.layout_file.string());
  return res;
}

FitGmResult run_fit_gm(const RunContext& ctx) {
  const Config& cfg = ctx.config;
  if (!cfg.is_set("fit.data")) throw ConfigError("missing required key 'fit.data'");
  const auto path = cfg.path("fit.data");
  const int min_points = std::max(3, cfg.integer("fit.min_points"));
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open anti-crossing file '{}'", path.string()));

  // Groups keyed by hanger width; rows with blank frequencies keep the group
  // alive but contribute no point.
  std::map<double, std::vector<mech::AnticrossingPoint>> groups;
  std::string line;
  std::size_t row = 0;
  bool header = false;
  constexpr std::string_view kHeader = "w_h_um,l_s_um,f_minus_hz,f_plus_hz";
  while (std::getline(in, line)) {
    ++row;
    const auto text = csv::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header) {
      if (text != kHeader) throw ParseError(row, fmt::format("expected header '{}'", kHeader));
      header = true;
      continue;
    }
    const auto f = csv::split(text);
    if (f.size() != 4) throw ParseError(row, fmt::format("expected 4 columns, found {}", f.size()));
    auto& group = groups[csv::parse_double(f[0], row, "w_h_um")];
    if (csv::trim(f[1]).empty() || csv::trim(f[2]).empty() || csv::trim(f[3]).empty()) continue;
    group.push_back({csv::parse_double(f[1], row, "l_s_um"), to_angular(csv::parse_double(f[2], row, "f_minus_hz")),
                     to_angular(csv::parse_double(f[3], row, "f_plus_hz"))});
  }
  if (!header) throw ParseError(row, "anti-crossing file has no header");

  FitGmResult res;
  for (auto& [w_h, points] : groups) {
    GmRow r;
    r.w_h_um = w_h;
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.l_s_um < b.l_s_um; });
    if (points.size() < static_cast<std::size_t>(min_points)) {
      r.error = fmt::format("{} usable points (need {})", points.size(), min_points);
    } else {
      try {
        r.fit = mech::fit_gm(points);
      } catch (const FitError& e) {
        r.error = e.what();
      } catch (const ValidationError& e) {
        r.error = e.what();
      }
    }
    res.rows.push_back(std::move(r));
  }

  res.report_file = output_path(ctx, "gm_fit.csv");
  csv::write_atomically(res.report_file, [&](std::ostream& out) {
    out << "w_h_um,g_m_hz,residual\n";
    for (const auto& r : res.rows) {
      if (r.fit) {
        out << csv::join({csv::format_double(r.w_h_um), csv::format_double(to_hz(r.fit->g_m)),
                          csv::format_double(to_hz(r.fit->residual_norm))})
            << '\n';
      } else {
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        out << csv::format_double(r.w_h_um) << ",,error: " << msg << '\n';
      }
    }
  });

  for (const auto& r : res.rows) {
    if (r.fit) {
      say(ctx, "w_h = {} um: g_m/2pi = {:.6g} Hz (residual {:.3g} Hz, {} iterations)", r.w_h_um, to_hz(r.fit->g_m),
          to_hz(r.fit->residual_norm), r.fit->iterations);
    } else {
      say(ctx, "w_h = {} um: fit failed: {}", r.w_h_um, r.error);
    }
  }
  say(ctx, "wrote {}", res.report_file.string());
  return res;
}

}  // namespace oam::cli
