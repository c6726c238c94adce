#include <doctest.h>

#include <limits>
#include <sstream>

#include "oam/constants.hpp"
#include "oam/coupled_mechanics.hpp"
#include "oam/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace oam;
using mech::CoupledOscillator;

namespace {

constexpr double MHz = 2 * std::numbers::pi * 1e6;

CoupledOscillator::Params fig2b_params() {
  // Bare pair that hybridizes into 4.81 / 5.96 MHz with g_m / 2 pi = 1.5 MHz.
  const auto bare = mech::bare_from_hybrid(4.81 * MHz, 5.96 * MHz, 1.5 * MHz);
  CoupledOscillator::Params p;
  p.m1 = 9e-11;
  p.m2 = 8e-11;
  p.omega1 = bare.twist;
  p.omega2 = bare.bounce;
  p.gamma1 = p.omega1 / 500;
  p.gamma2 = p.omega2 / 500;
  p.g_m = 1.5 * MHz;
  return p;
}

const device::DeviceDataset& sample() {
  static const auto ds = device::load_dataset(test::data_dir() / "sample_device.csv");
  return ds;
}

std::vector<mech::AnticrossingPoint> synthetic(double g, double w2, const mech::LinearModel& w1,
                                               const std::vector<double>& ls) {
  std::vector<mech::AnticrossingPoint> out;
  for (const double l : ls) {
    const auto h = mech::hybrid_frequencies(w1(l), w2, g);
    out.push_back({l, h.lower, h.upper});
  }
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = a + (b - a) * k / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("susceptibility limits") {
  const double w = 3.0, g = 0.1;
  CHECK(mech::susceptibility(0.0, w, g) == mech::cplx(1.0 / (w * w), 0.0));
  const auto on = mech::susceptibility(w, w, g);
  CHECK(on.real() == doctest::Approx(0.0));
  CHECK(on.imag() == doctest::Approx(1.0 / (g * w)).epsilon(1e-14));
  CHECK_THROWS_AS(mech::susceptibility(w, w, 0.0), PoleError);
  CHECK_NOTHROW(mech::susceptibility(w * 1.001, w, 0.0));
}

TEST_CASE("model validation") {
  auto p = fig2b_params();
  CHECK_NOTHROW(CoupledOscillator{p});
  auto bad = p;
  bad.m1 = 0;
  CHECK_THROWS_AS(CoupledOscillator{bad}, ValidationError);
  bad = p;
  bad.gamma2 = -1;
  CHECK_THROWS_AS(CoupledOscillator{bad}, ValidationError);
  bad = p;
  bad.g_m = std::sqrt(p.omega1 * p.omega2) * 1.0001;
  CHECK_THROWS_AS(CoupledOscillator{bad}, ValidationError);
}

TEST_CASE("stiffness coupling is reciprocal with the mass-ratio factors") {
  const CoupledOscillator m(fig2b_params());
  const auto k = m.stiffness();
  const double g4 = std::pow(m.g_m(), 4);
  CHECK(k[0] == m.omega1() * m.omega1());
  CHECK(k[3] == m.omega2() * m.omega2());
  CHECK(k[1] * k[2] == doctest::Approx(g4).epsilon(1e-14));
  CHECK(k[1] / k[2] == doctest::Approx(m.m2() / m.m1()).epsilon(1e-14));
}

TEST_CASE("driven response: decoupled and static limits") {
  auto p = fig2b_params();
  p.g_m = 0;
  const CoupledOscillator free(p);
  const double F = 1e-12, w = 5 * MHz;
  const auto r = mech::driven_response(free, {F, w});
  CHECK(r.x2 == mech::cplx(0, 0));
  const auto expect = F / p.m1 / mech::cplx(p.omega1 * p.omega1 - w * w, -p.gamma1 * w);
  CHECK(std::abs(r.x1 - expect) < 1e-14 * std::abs(expect));

  const CoupledOscillator m(fig2b_params());
  const auto s = mech::driven_response(m, {F, 0.0});
  const auto& q = m.params();
  const double static_x2 =
      q.g_m * q.g_m * F / (std::sqrt(q.m1 * q.m2) * (std::pow(q.omega1 * q.omega2, 2) - std::pow(q.g_m, 4)));
  CHECK(std::abs(s.x2) == doctest::Approx(static_x2).epsilon(1e-12));
}

TEST_CASE("undamped drive on an eigenfrequency is a pole") {
  auto p = fig2b_params();
  p.gamma1 = p.gamma2 = 0;
  const CoupledOscillator m(p);
  const auto h = mech::hybrid_frequencies(m);
  // Exactly on a root the determinant may round to a tiny non-zero value;
  // either way the result must not be a silent infinity.
  bool pole = false;
  try {
    const auto r = mech::driven_response(m, {1e-12, h.lower});
    CHECK(std::isfinite(std::abs(r.x2)));
  } catch (const PoleError&) {
    pole = true;
  }
  (void)pole;
  auto d = p;
  d.g_m = 0;
  CHECK_THROWS_AS(mech::driven_response(CoupledOscillator(d), {1e-12, d.omega1}), PoleError);
}

TEST_CASE("driven response matches RK4 time integration (20 random models)") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> uf(1.0, 10.0), um(-12.0, -10.0), uq(20.0, 200.0), ug(0.0, 0.6),
      ud(0.6, 1.4);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::TwoModeParams o{};
    o.m1 = std::pow(10.0, um(rng));
    o.m2 = std::pow(10.0, um(rng));
    o.omega1 = uf(rng) * MHz;
    o.omega2 = uf(rng) * MHz;
    o.gamma1 = o.omega1 / uq(rng);
    o.gamma2 = o.omega2 / uq(rng);
    o.g = ug(rng) * std::sqrt(o.omega1 * o.omega2);
    const CoupledOscillator m({o.m1, o.m2, o.omega1, o.omega2, o.gamma1, o.gamma2, o.g});
    const auto h = mech::hybrid_frequencies(m);
    const double w = ud(rng) * (trial % 2 ? h.upper : h.lower);
    const double F = 1e-12;

    const auto fd = mech::driven_response(m, {F, w});
    const auto td = oracle::rk4_steady_state(o, F, w);
    INFO("trial " << trial);
    CHECK(test::rel_err(std::abs(fd.x1), std::abs(td.x1)) < 1e-3);
    CHECK(test::rel_err(std::abs(fd.x2), std::abs(td.x2)) < 1e-3);
    CHECK(std::abs(std::arg(fd.x1 / td.x1)) < 1e-3);
    if (o.g > 0) CHECK(std::abs(std::arg(fd.x2 / td.x2)) < 1e-3);
  }
}

TEST_CASE("hybrid frequencies") {
  const auto h0 = mech::hybrid_frequencies(6.0, 4.0, 0.0);
  CHECK(h0.lower == 4.0);
  CHECK(h0.upper == 6.0);

  SUBCASE("degenerate splitting in omega^2 is 2 g^2") {
    for (const double g : {0.01, 0.3, 1.5, 2.9}) {
      const double w0 = 5.0;
      const auto h = mech::hybrid_frequencies(w0, w0, g);
      const double split = h.upper * h.upper - h.lower * h.lower;
      CHECK(std::abs(split - 2 * g * g) <= 8 * std::numeric_limits<double>::epsilon() * w0 * w0);
    }
  }

  SUBCASE("roots of the undamped determinant, found by bisection") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(1.0, 10.0), ug(0.0, 0.9);
    for (int k = 0; k < 50; ++k) {
      const double w1 = u(rng), w2 = u(rng), g = ug(rng) * std::sqrt(w1 * w2);
      const auto det = [&](double w) { return (w1 * w1 - w * w) * (w2 * w2 - w * w) - std::pow(g, 4); };
      const auto bisect = [&](double a, double b) {
        for (int it = 0; it < 200; ++it) {
          const double c = 0.5 * (a + b);
          ((det(a) < 0) == (det(c) < 0) ? a : b) = c;
        }
        return 0.5 * (a + b);
      };
      const double mid = std::sqrt(0.5 * (w1 * w1 + w2 * w2));
      const auto h = mech::hybrid_frequencies(w1, w2, g);
      CHECK(h.lower == doctest::Approx(bisect(0.0, mid)).epsilon(1e-12));
      CHECK(h.upper == doctest::Approx(bisect(mid, 100.0)).epsilon(1e-12));
    }
  }

  SUBCASE("bare_from_hybrid inverts the forward map") {
    const auto h = mech::hybrid_frequencies(4.85 * MHz, 5.92 * MHz, 1.5 * MHz);
    const auto b = mech::bare_from_hybrid(h.lower, h.upper, 1.5 * MHz);
    CHECK(b.twist == doctest::Approx(4.85 * MHz).epsilon(1e-12));
    CHECK(b.bounce == doctest::Approx(5.92 * MHz).epsilon(1e-12));
  }
}

TEST_CASE("two-peak response curve") {
  const CoupledOscillator m(fig2b_params());
  std::vector<double> grid;
  for (double f = 4.0e6; f <= 7.0e6 + 1; f += 1e3) grid.push_back(to_angular(f));
  const auto curve = mech::response_curve(m, 1e-12, grid);
  REQUIRE(curve.omega.size() == grid.size());
  const auto a1 = mech::magnitudes(curve.x1);
  const auto a2 = mech::magnitudes(curve.x2);
  const auto peaks = mech::find_peaks(a2);
  REQUIRE(peaks.size() == 2);
  const auto h = mech::hybrid_frequencies(m);
  CHECK(std::abs(curve.omega[peaks[0]] - h.lower) <= m.gamma1() / 2);
  CHECK(std::abs(curve.omega[peaks[1]] - h.upper) <= m.gamma2() / 2);
  CHECK(std::abs(to_hz(curve.omega[peaks[0]]) - 4.81e6) <= 1e3);
  CHECK(std::abs(to_hz(curve.omega[peaks[1]]) - 5.96e6) <= 1e3);
  // The directly driven twist peak dominates the pad response.
  CHECK(a1[peaks[0]] > a1[peaks[1]]);

  auto p = fig2b_params();
  p.g_m = 0;
  const auto flat = mech::response_curve(CoupledOscillator(p), 1e-12, grid);
  for (const auto& x : flat.x2) CHECK(x == mech::cplx(0, 0));

  std::ostringstream out;
  mech::write_response_curve(curve, out);
  const std::string text = out.str();
  CHECK(text.rfind(std::string(mech::kResponseCurveHeader) + "\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(grid.size() + 1));
}

TEST_CASE("find_peaks") {
  const std::vector<double> v{0, 1, 2, 1, 1, 3, 3, 2, 5};
  const auto p = mech::find_peaks(v);
  CHECK(p == std::vector<std::size_t>{2, 5});
  CHECK(mech::find_peaks(std::vector<double>{1, 2, 3}).empty());
  CHECK(mech::find_peaks(std::vector<double>{}).empty());
}

TEST_CASE("|x2| falls as omega^-4 far above resonance") {
  const CoupledOscillator m(fig2b_params());
  const double w_hi = std::max(m.omega1(), m.omega2());
  const double a = std::abs(mech::driven_response(m, {1e-12, 100 * w_hi}).x2);
  const double b = std::abs(mech::driven_response(m, {1e-12, 10000 * w_hi}).x2);
  const double slope = std::log10(b / a) / 2.0;
  CHECK(slope == doctest::Approx(-4.0).epsilon(1e-3));
}

TEST_CASE("fit_gm recovers noiseless synthetic data") {
  const double g = 0.5 * MHz, w2 = 5.0 * MHz;
  const mech::LinearModel w1{5.0 * MHz, -0.5 * MHz, 10.0};
  const auto data = synthetic(g, w2, w1, linspace(8, 12, 21));

  const auto auto_fit = mech::fit_gm(data);
  CHECK(test::rel_err(auto_fit.g_m, g) < 1e-6);
  CHECK(test::rel_err(auto_fit.omega2, w2) < 1e-6);

  // Fixed omega2 and a deliberately poor start.
  const auto fixed = mech::fit_gm(data, {4.6 * MHz, -0.3 * MHz, 10.0}, w2);
  CHECK(test::rel_err(fixed.g_m, g) < 1e-6);
  CHECK(test::rel_err(fixed.omega1(11.0), w1(11.0)) < 1e-6);
  CHECK(fixed.omega2 == w2);
}

TEST_CASE("fit_gm under 0.1% multiplicative noise, 100 seeds") {
  struct Case {
    double g_mhz;
    double lo, hi;
    int points;
  };
  // The weak-coupling case needs a window dense around the crossing: the gap
  // there is only ~10x the per-point noise.
  for (const Case c : {Case{1.5, 8, 12, 41}, Case{0.5, 9.5, 10.5, 1001}}) {
    const double g = c.g_mhz * MHz, w2 = 5.0 * MHz;
    const mech::LinearModel w1{5.0 * MHz, -0.5 * MHz, 10.0};
    const auto clean = synthetic(g, w2, w1, linspace(c.lo, c.hi, c.points));
    double worst = 0;
    for (int seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> n(0.0, 1e-3);
      auto noisy = clean;
      for (auto& p : noisy) {
        p.omega_minus *= 1 + n(rng);
        p.omega_plus *= 1 + n(rng);
      }
      worst = std::max(worst, test::rel_err(mech::fit_gm(noisy).g_m, g));
    }
    INFO("g_m/2pi = " << c.g_mhz << " MHz, worst relative error " << worst);
    CHECK(worst < 0.02);
  }
}

TEST_CASE("fit_gm edge cases") {
  const mech::LinearModel w1{5.0 * MHz, -0.5 * MHz, 10.0};
  // No splitting anywhere: the branches coincide.
  std::vector<mech::AnticrossingPoint> flat;
  for (const double l : linspace(8, 12, 9)) flat.push_back({l, w1(l), w1(l)});
  CHECK(mech::fit_gm(flat).g_m == 0.0);

  // A true crossing (g = 0) fits to zero within solver tolerance.
  const auto crossing = synthetic(0.0, 5.0 * MHz, w1, linspace(8, 12, 9));
  CHECK(mech::fit_gm(crossing).g_m < 1e-6 * MHz);

  const auto few = synthetic(0.5 * MHz, 5.0 * MHz, w1, {9.0, 11.0});
  CHECK_THROWS_AS(mech::fit_gm(few), FitError);
}

TEST_CASE("torque to displacement") {
  device::MechanicalModeRecord mode;
  mode.omega_m = 5 * MHz;
  mode.m_eff = 2.7e-14;
  mode.r_eff = 1e-6;
  mode.q_m = 1e4;
  mode.g_om = to_angular(32e18);
  const double tau = 1e-15;
  CHECK(std::abs(mech::torque_to_displacement(mode, tau, mode.omega_m)) ==
        doctest::Approx(mode.q_m * tau / (mode.m_eff * mode.r_eff * mode.omega_m * mode.omega_m)).epsilon(1e-12));
  CHECK(mech::torque_to_displacement(mode, tau, 0.0) ==
        mech::cplx(tau / (mode.m_eff * mode.r_eff * mode.omega_m * mode.omega_m), 0.0));

  // Independent path: a single driven oscillator with F = tau / r_eff.
  const auto b = device::interpolate(sample(), device::Branch::bounce_like, 12.0, 500.0);
  CoupledOscillator::Params p{b.m_eff, b.m_eff, b.omega_m, 2 * b.omega_m, b.omega_m / b.q_m, 1.0, 0.0};
  for (const double w : {0.9 * b.omega_m, b.omega_m, 1.05 * b.omega_m}) {
    const auto x = mech::torque_to_displacement(b, tau, w);
    const auto d = mech::driven_response(CoupledOscillator(p), {tau / b.r_eff, w}).x1;
    CHECK(test::rel_err(std::abs(x), std::abs(d)) < 1e-3);
  }
}

TEST_CASE("optomechanical shift") {
  const auto mode = device::interpolate(sample(), device::Branch::hybrid_lower, 12.0);
  CHECK(mech::optomechanical_shift(mode, 0.0, mode.omega_m) == 0.0);
  const double one = mech::optomechanical_shift(mode, 1e-15, mode.omega_m);
  CHECK(mech::optomechanical_shift(mode, 2e-15, mode.omega_m) == doctest::Approx(2 * one).epsilon(1e-15));

  // Driving each branch on resonance, the shift peaks at the anti-crossing.
  for (const auto br : {device::Branch::twist_like, device::Branch::hybrid_lower, device::Branch::hybrid_upper}) {
    double best_ls = 0, best = 0;
    for (double l = 5; l <= 15; l += 0.25) {
      const auto m = device::interpolate(sample(), br, l, 500.0);
      const double s = mech::optomechanical_shift(m, 1e-15, m.omega_m);
      if (s > best) {
        best = s;
        best_ls = l;
      }
    }
    CHECK(best_ls == device::anticrossing_center(sample()));
  }
}
