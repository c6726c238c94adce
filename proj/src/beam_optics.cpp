#include "oam/beam_optics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <ostream>

#include <fftw3.h>
#include <fmt/format.h>

#include "oam/constants.hpp"
#include "oam/csv.hpp"
#include "oam/error.hpp"

namespace oam::optics {

namespace {

void check_grid(int n, double pitch) {
  if (n < 32 || (n & (n - 1)) != 0) {
    throw ValidationError(fmt::format("grid size must be a power of two >= 32, got {}", n));
  }
  if (!(pitch > 0)) throw ValidationError("pixel pitch must be positive");
}

void check_waist(double pitch, double w0) {
  if (!(w0 >= 4.0 * pitch)) {
    throw ValidationError(fmt::format("waist {} m is under-sampled (needs >= 4 pixels of {} m)", w0, pitch));
  }
}

// (x + i y)^l for l >= 0, (x - i y)^|l| otherwise.
cplx helical_power(double x, double y, int l) {
  const cplx base(x, l >= 0 ? y : -y);
  cplx out(1.0, 0.0);
  for (int k = 0; k < std::abs(l); ++k) out *= base;
  return out;
}

double generalized_laguerre(int p, double alpha, double x) {
  if (p == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < p; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w;
}

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t count)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

void fft2(FftwBuffer& buf, int n, int sign) {
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(n, n, buf.data, buf.data, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

double spatial_frequency(int k, int n, double pitch) {
  const int shifted = k < n / 2 ? k : k - n;
  return shifted / (n * pitch);
}

cplx bilinear(const ComplexGrid& g, double x, double y) {
  const double fc = x / g.pitch() + g.n() / 2;
  const double fr = y / g.pitch() + g.n() / 2;
  const int c0 = static_cast<int>(std::floor(fc));
  const int r0 = static_cast<int>(std::floor(fr));
  if (c0 < 0 || r0 < 0 || c0 + 1 >= g.n() || r0 + 1 >= g.n()) return {};
  const double tc = fc - c0;
  const double tr = fr - r0;
  return (1 - tr) * ((1 - tc) * g.at(r0, c0) + tc * g.at(r0, c0 + 1)) +
         tr * ((1 - tc) * g.at(r0 + 1, c0) + tc * g.at(r0 + 1, c0 + 1));
}

}  // namespace

ComplexGrid::ComplexGrid(int n, double pitch)
    : n_(n), pitch_(pitch), values_(static_cast<std::size_t>(std::max(n, 0)) * std::max(n, 0)) {
  check_grid(n, pitch);
}

ComplexGrid::ComplexGrid(int n, double pitch, std::vector<cplx> values)
    : n_(n), pitch_(pitch), values_(std::move(values)) {
  check_grid(n, pitch);
  if (values_.size() != static_cast<std::size_t>(n) * n) {
    throw ValidationError("grid value count does not match n * n");
  }
}

ScalarField::ScalarField(int n, double pitch, double wavelength)
    : ComplexGrid(n, pitch), wavelength_(wavelength) {
  if (!(wavelength > 0)) throw ValidationError("wavelength must be positive");
}

ScalarField::ScalarField(int n, double pitch, double wavelength, std::vector<cplx> values)
    : ComplexGrid(n, pitch, std::move(values)), wavelength_(wavelength) {
  if (!(wavelength > 0)) throw ValidationError("wavelength must be positive");
}

double ScalarField::power() const {
  double sum = 0.0;
  for (const auto& v : values()) sum += std::norm(v);
  return sum * pitch() * pitch();
}

ScalarField ScalarField::normalized() const {
  const double p = power();
  if (!(p > 0)) throw DomainError("cannot normalize a zero-power field");
  ScalarField out = *this;
  const double scale = 1.0 / std::sqrt(p);
  for (auto& v : out.values()) v *= scale;
  return out;
}

ScalarField make_gaussian(int n, double pitch, double wavelength, double w0) {
  return make_lg(n, pitch, wavelength, {0, 0, w0});
}

ScalarField make_lg(int n, double pitch, double wavelength, const LGIndex& idx) {
  check_grid(n, pitch);
  if (idx.p < 0) throw ValidationError("LG radial index must be non-negative");
  check_waist(pitch, idx.w0);
  ScalarField field(n, pitch, wavelength);
  const int abs_l = std::abs(idx.l);
  const double scale = std::sqrt(2.0) / idx.w0;
  for (int row = 0; row < n; ++row) {
    const double y = field.coordinate(row);
    for (int col = 0; col < n; ++col) {
      const double x = field.coordinate(col);
      const double r2 = x * x + y * y;
      const double radial = std::pow(scale, abs_l) *
                            generalized_laguerre(idx.p, abs_l, 2.0 * r2 / (idx.w0 * idx.w0)) *
                            std::exp(-r2 / (idx.w0 * idx.w0));
      field.at(row, col) = radial * helical_power(x, y, idx.l);
    }
  }
  return field.normalized();
}

Mask vortex_mask(int n, double pitch, int delta_l) {
  Mask mask(n, pitch);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const double phi = std::atan2(mask.coordinate(row), mask.coordinate(col));
      mask.at(row, col) = std::polar(1.0, delta_l * phi);
    }
  }
  return mask;
}

Mask staircase_vortex_mask(int n, double pitch, int delta_l, int levels) {
  if (levels < 1) throw ValidationError("staircase needs at least one level");
  Mask mask(n, pitch);
  const double step = kTwoPi / levels;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const double phi = std::atan2(mask.coordinate(row), mask.coordinate(col));
      const long level = std::lround(wrap_phase(delta_l * phi) / step) % levels;
      mask.at(row, col) = std::polar(1.0, static_cast<double>(level) * step);
    }
  }
  return mask;
}

Mask aperture_mask(int n, double pitch, double radius) {
  Mask mask(n, pitch);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const double x = mask.coordinate(col);
      const double y = mask.coordinate(row);
      mask.at(row, col) = (x * x + y * y <= radius * radius) ? 1.0 : 0.0;
    }
  }
  return mask;
}

ScalarField apply_mask(const ScalarField& field, const Mask& mask) {
  if (!field.same_grid(mask)) throw ValidationError("mask and field grids differ");
  ScalarField out = field;
  auto dst = out.values();
  const auto src = mask.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
  return out;
}

ScalarField propagate(const ScalarField& field, double z, PropagationReport* report) {
  if (!std::isfinite(z)) throw ValidationError("propagation distance must be finite");
  const int n = field.n();
  const std::size_t count = static_cast<std::size_t>(n) * n;
  if (z == 0.0) {
    if (report) *report = {};
    return field;
  }

  FftwBuffer buf(count);
  const auto src = field.values();
  for (std::size_t i = 0; i < count; ++i) {
    buf.data[i][0] = src[i].real();
    buf.data[i][1] = src[i].imag();
  }
  fft2(buf, n, FFTW_FORWARD);

  const double inv_lambda2 = 1.0 / (field.wavelength() * field.wavelength());
  const double df = 1.0 / (n * field.pitch());
  // Highest frequency at which the transfer-function chirp is still sampled.
  const double f_limit =
      1.0 / (field.wavelength() * std::sqrt(std::pow(2.0 * df * std::abs(z), 2) + 1.0));

  double total = 0.0, evanescent = 0.0, aliased = 0.0;
  for (int row = 0; row < n; ++row) {
    const double fy = spatial_frequency(row, n, field.pitch());
    for (int col = 0; col < n; ++col) {
      const double fx = spatial_frequency(col, n, field.pitch());
      auto& c = buf.data[static_cast<std::size_t>(row) * n + col];
      const double weight = c[0] * c[0] + c[1] * c[1];
      total += weight;
      const double arg = inv_lambda2 - fx * fx - fy * fy;
      if (arg <= 0.0) {
        evanescent += weight;
        c[0] = c[1] = 0.0;
        continue;
      }
      if (std::abs(fx) > f_limit || std::abs(fy) > f_limit) aliased += weight;
      const double kz = kTwoPi * std::sqrt(arg);
      const cplx h = std::polar(1.0, kz * z);
      const cplx v = cplx(c[0], c[1]) * h;
      c[0] = v.real();
      c[1] = v.imag();
    }
  }

  fft2(buf, n, FFTW_BACKWARD);
  std::vector<cplx> out(count);
  const double norm = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = cplx(buf.data[i][0], buf.data[i][1]) * norm;

  if (report) {
    report->evanescent_fraction = total > 0 ? evanescent / total : 0.0;
    report->aliased_fraction = total > 0 ? aliased / total : 0.0;
    report->band_limited = report->aliased_fraction <= 1e-6;
  }
  return ScalarField(n, field.pitch(), field.wavelength(), std::move(out));
}

double fidelity(const ComplexGrid& field, const ComplexGrid& reference) {
  if (!field.same_grid(reference)) throw ValidationError("fidelity needs matching grids");
  cplx overlap(0.0, 0.0);
  double pa = 0.0, pb = 0.0;
  const auto a = field.values();
  const auto b = reference.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    overlap += a[i] * std::conj(b[i]);
    pa += std::norm(a[i]);
    pb += std::norm(b[i]);
  }
  if (!(pa > 0 && pb > 0)) throw DomainError("fidelity of a zero-power field is undefined");
  return std::min(1.0, std::norm(overlap) / (pa * pb));
}

double AzimuthalSpectrum::at(int l) const {
  if (l < l_min || l > l_max()) return 0.0;
  return fraction[static_cast<std::size_t>(l - l_min)];
}

double AzimuthalSpectrum::total() const {
  double s = 0.0;
  for (const double f : fraction) s += f;
  return s;
}

int AzimuthalSpectrum::dominant() const {
  const auto it = std::max_element(fraction.begin(), fraction.end());
  return l_min + static_cast<int>(it - fraction.begin());
}

AzimuthalSpectrum azimuthal_spectrum(const ComplexGrid& field, int l_min, int l_max) {
  if (l_max < l_min) throw ValidationError("empty azimuthal order range");
  const int max_order = std::max(std::abs(l_min), std::abs(l_max));
  int samples = 256;
  while (samples <= 4 * max_order) samples *= 2;

  std::vector<double> cos_t(samples), sin_t(samples);
  for (int m = 0; m < samples; ++m) {
    const double t = kTwoPi * m / samples;
    cos_t[m] = std::cos(t);
    sin_t[m] = std::sin(t);
  }
  const int orders = l_max - l_min + 1;
  // e^{-i l theta_m}, indexed [order][m].
  std::vector<cplx> kernel(static_cast<std::size_t>(orders) * samples);
  for (int o = 0; o < orders; ++o) {
    for (int m = 0; m < samples; ++m) {
      kernel[static_cast<std::size_t>(o) * samples + m] =
          std::polar(1.0, -static_cast<double>(l_min + o) * kTwoPi * m / samples);
    }
  }

  const int rings = field.n() / 2 - 2;
  std::vector<double> power(orders, 0.0);
  double total = 0.0;
  std::vector<cplx> ring(samples);
  for (int k = 0; k < rings; ++k) {
    const double r = (k + 0.5) * field.pitch();
    double ring_power = 0.0;
    for (int m = 0; m < samples; ++m) {
      ring[m] = bilinear(field, r * cos_t[m], r * sin_t[m]);
      ring_power += std::norm(ring[m]);
    }
    total += ring_power / samples * r;
    for (int o = 0; o < orders; ++o) {
      cplx c(0.0, 0.0);
      const cplx* kern = &kernel[static_cast<std::size_t>(o) * samples];
      for (int m = 0; m < samples; ++m) c += ring[m] * kern[m];
      c /= static_cast<double>(samples);
      power[o] += std::norm(c) * r;
    }
  }
  if (!(total > 0)) throw DomainError("azimuthal spectrum of a zero field");
  AzimuthalSpectrum spec;
  spec.l_min = l_min;
  spec.fraction.resize(orders);
  for (int o = 0; o < orders; ++o) spec.fraction[o] = power[o] / total;
  return spec;
}

double optimize_reference_waist(const ScalarField& field, int p, int l, double lo, double hi,
                                double* best_fidelity) {
  const double floor_waist = 4.0 * field.pitch();
  lo = std::max(lo, floor_waist);
  if (!(hi > lo)) throw DomainError("waist search interval is empty after the sampling guard");
  auto score = [&](double w) {
    return fidelity(field, make_lg(field.n(), field.pitch(), field.wavelength(), {p, l, w}));
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = score(c), fd = score(d);
  while ((b - a) > 1e-6 * (a + b)) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = score(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = score(d);
    }
  }
  const double best = fc > fd ? c : d;
  if (best_fidelity) *best_fidelity = std::max(fc, fd);
  return best;
}

ConversionMetrics conversion_metrics(const ScalarField& input, const Mask& mask, const LGIndex& target,
                                     double z_eval, ScalarField* output) {
  const double input_power = input.power();
  if (!(input_power > 0)) throw DomainError("input field carries no power");
  const ScalarField at_mask = apply_mask(input, mask);
  ScalarField evaluated = z_eval == 0.0 ? at_mask : propagate(at_mask, z_eval);

  ConversionMetrics m;
  m.transmission = evaluated.power() / input_power;
  m.fidelity_fixed_waist =
      fidelity(at_mask, make_lg(input.n(), input.pitch(), input.wavelength(), target));
  m.best_waist = optimize_reference_waist(at_mask, target.p, target.l, 0.3 * target.w0, 3.0 * target.w0,
                                          &m.fidelity);
  m.fidelity = std::max(m.fidelity, m.fidelity_fixed_waist);
  m.efficiency = m.fidelity * m.transmission;
  if (output) *output = std::move(evaluated);
  return m;
}

void write_field(const ScalarField& field, std::ostream& out) {
  out << "x_m,y_m,re,im\n";
  for (int row = 0; row < field.n(); ++row) {
    const std::string y = csv::format_double(field.coordinate(row));
    for (int col = 0; col < field.n(); ++col) {
      const auto v = field.at(row, col);
      out << csv::format_double(field.coordinate(col)) << ',' << y << ',' << csv::format_double(v.real())
          << ',' << csv::format_double(v.imag()) << '\n';
    }
  }
}

void write_field_header(const ScalarField& field, std::ostream& out) {
  out << "n," << field.n() << '\n'
      << "pitch_m," << csv::format_double(field.pitch()) << '\n'
      << "wavelength_m," << csv::format_double(field.wavelength()) << '\n';
}

void write_raster(const ComplexGrid& field, RasterKind kind, int stride, std::ostream& out) {
  if (stride < 1) throw ValidationError("raster stride must be >= 1");
  for (int row = 0; row < field.n(); row += stride) {
    for (int col = 0; col < field.n(); col += stride) {
      if (col) out << ',';
      const auto v = field.at(row, col);
      out << fmt::format("{:.6e}", kind == RasterKind::intensity ? std::norm(v) : std::arg(v));
    }
    out << '\n';
  }
}

}  // namespace oam::optics
