#include "oam/swg_design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "oam/constants.hpp"
#include "oam/csv.hpp"
#include "oam/error.hpp"
#include "oam/parallel.hpp"

namespace oam::swg {

namespace {

constexpr double kTableMin = 700e-9;
constexpr double kTableMax = 1000e-9;
constexpr double kTableStep = 10e-9;

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w;
}

double circular_distance(double a, double b) {
  const double d = wrap_phase(a - b);
  return std::min(d, kTwoPi - d);
}

}  // namespace

LookupTable::LookupTable(std::vector<double> wavelengths, std::vector<std::vector<double>> phases,
                         std::vector<std::vector<double>> amplitudes)
    : wavelengths_(std::move(wavelengths)), phases_(std::move(phases)), amplitudes_(std::move(amplitudes)) {
  if (wavelengths_.empty()) throw ValidationError("lookup table has no wavelengths");
  if (phases_.size() != wavelengths_.size() || amplitudes_.size() != wavelengths_.size()) {
    throw ValidationError("lookup table rows do not match its wavelength grid");
  }
  for (std::size_t w = 1; w < wavelengths_.size(); ++w) {
    if (!(wavelengths_[w] > wavelengths_[w - 1])) {
      throw ValidationError("lookup wavelengths must be strictly increasing");
    }
  }
  const std::size_t levels = phases_.front().size();
  if (levels == 0) throw ValidationError("lookup table has no levels");
  for (std::size_t w = 0; w < wavelengths_.size(); ++w) {
    if (phases_[w].size() != levels || amplitudes_[w].size() != levels) {
      throw ValidationError("lookup table rows have inconsistent level counts");
    }
    for (const double a : amplitudes_[w]) {
      if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("lookup amplitudes must lie in [0, 1]");
    }
  }
}

std::pair<std::size_t, double> LookupTable::locate(double lambda) const {
  if (wavelengths_.empty()) throw DomainError("empty lookup table");
  const double lo = wavelengths_.front();
  const double hi = wavelengths_.back();
  // Tolerate rounding at the edges of the table.
  const double slack = 1e-12 * hi;
  if (!(lambda >= lo - slack && lambda <= hi + slack)) {
    throw DomainError(fmt::format("wavelength {} nm is outside the lookup table [{}, {}] nm", lambda * 1e9,
                                  lo * 1e9, hi * 1e9));
  }
  if (wavelengths_.size() == 1) return {0, 0.0};
  auto it = std::upper_bound(wavelengths_.begin(), wavelengths_.end(), lambda);
  std::size_t w = it == wavelengths_.begin() ? 0 : static_cast<std::size_t>(it - wavelengths_.begin()) - 1;
  w = std::min(w, wavelengths_.size() - 2);
  const double t = (lambda - wavelengths_[w]) / (wavelengths_[w + 1] - wavelengths_[w]);
  return {w, std::clamp(t, 0.0, 1.0)};
}

double LookupTable::phase(std::size_t level, double lambda) const {
  const auto [w, t] = locate(lambda);
  if (level >= levels()) throw DomainError("lookup level out of range");
  if (t == 0.0) return phases_[w][level];
  return (1 - t) * phases_[w][level] + t * phases_[w + 1][level];
}

double LookupTable::amplitude(std::size_t level, double lambda) const {
  const auto [w, t] = locate(lambda);
  if (level >= levels()) throw DomainError("lookup level out of range");
  if (t == 0.0) return amplitudes_[w][level];
  return (1 - t) * amplitudes_[w][level] + t * amplitudes_[w + 1][level];
}

LookupTable default_lookup(double design_lambda, std::size_t levels, bool phase_increasing) {
  if (!(design_lambda >= kTableMin && design_lambda <= kTableMax)) {
    throw DomainError(fmt::format("design wavelength {} nm is outside [700, 1000] nm", design_lambda * 1e9));
  }
  if (levels < 1) throw ValidationError("lookup needs at least one level");
  const auto count = static_cast<std::size_t>(std::lround((kTableMax - kTableMin) / kTableStep)) + 1;
  const double sign = phase_increasing ? 1.0 : -1.0;
  std::vector<double> wavelengths(count);
  std::vector<std::vector<double>> phases(count, std::vector<double>(levels));
  std::vector<std::vector<double>> amplitudes(count, std::vector<double>(levels, std::sqrt(kDefaultTransmission)));
  for (std::size_t w = 0; w < count; ++w) {
    const double lambda = kTableMin + static_cast<double>(w) * kTableStep;
    wavelengths[w] = lambda;
    // Optical path through the pillars is fixed, so the imparted phase falls off with wavelength.
    const double span = 2.0 - lambda / design_lambda;
    for (std::size_t k = 0; k < levels; ++k) {
      const double step = kTwoPi * static_cast<double>(k) / static_cast<double>(levels);
      phases[w][k] = wrap_phase(sign * step * span);
    }
  }
  return LookupTable(std::move(wavelengths), std::move(phases), std::move(amplitudes));
}

void SWGDesign::validate() const {
  if (!(aperture_d > 0)) throw ValidationError("aperture diameter must be positive");
  if (!(lattice_a > 0)) throw ValidationError("lattice constant must be positive");
  if (!(pillar_t > 0)) throw ValidationError("pillar thickness must be positive");
  if (diameters_nm.empty()) throw ValidationError("design has no pillar diameters");
  for (std::size_t k = 0; k < diameters_nm.size(); ++k) {
    if (!(diameters_nm[k] > 0)) throw ValidationError("pillar diameters must be positive");
    if (k && !(diameters_nm[k] > diameters_nm[k - 1])) {
      throw ValidationError("pillar diameters must be strictly increasing");
    }
    if (!(diameters_nm[k] * 1e-9 < lattice_a)) {
      throw ValidationError(fmt::format("pillar diameter {} nm does not fit the lattice", diameters_nm[k]));
    }
  }
  if (lookup.levels() != diameters_nm.size()) {
    throw ValidationError(fmt::format("lookup has {} levels for {} diameters", lookup.levels(), diameters_nm.size()));
  }
  // The table must be able to express (nearly) a full turn.
  const std::size_t levels = diameters_nm.size();
  std::vector<double> p(levels);
  for (std::size_t k = 0; k < levels; ++k) p[k] = wrap_phase(lookup.phase(k, design_lambda));
  std::sort(p.begin(), p.end());
  double largest_gap = kTwoPi - (p.back() - p.front());
  for (std::size_t k = 1; k < levels; ++k) largest_gap = std::max(largest_gap, p[k] - p[k - 1]);
  const double coverage = kTwoPi - largest_gap;
  if (levels > 1 && coverage < kTwoPi * (1.0 - 1.0 / levels) - 1e-9) {
    throw ValidationError(fmt::format("lookup phases span only {:.4f} rad at the design wavelength", coverage));
  }
}

Layout generate_layout(const SWGDesign& design) {
  design.validate();
  const double a = design.lattice_a;
  const double row_height = a * std::sqrt(3.0) / 2.0;
  const double radius = design.aperture_d / 2.0;
  const int j_max = static_cast<int>(std::ceil(radius / row_height)) + 1;
  const std::size_t levels = design.diameters_nm.size();

  std::vector<double> level_phase(levels);
  for (std::size_t k = 0; k < levels; ++k) level_phase[k] = design.lookup.phase(k, design.design_lambda);

  // Rows are independent, so they are built in parallel and concatenated in order.
  const auto rows = parallel_map(static_cast<std::size_t>(2 * j_max + 1), [&](std::size_t r) {
    const int j = static_cast<int>(r) - j_max;
    const double y = j * row_height;
    std::vector<PillarSite> row;
    const int i_lo = static_cast<int>(std::floor((-radius - j * a / 2.0) / a)) - 1;
    const int i_hi = static_cast<int>(std::ceil((radius - j * a / 2.0) / a)) + 1;
    for (int i = i_lo; i <= i_hi; ++i) {
      const double x = i * a + j * a / 2.0;
      if (x * x + y * y > radius * radius) continue;
      const double target = (x == 0.0 && y == 0.0) ? 0.0 : wrap_phase(design.delta_l * std::atan2(y, x));
      std::size_t best = 0;
      for (std::size_t k = 1; k < levels; ++k) {
        if (circular_distance(level_phase[k], target) < circular_distance(level_phase[best], target)) best = k;
      }
      row.push_back({x, y, design.diameters_nm[best], level_phase[best],
                     design.lookup.amplitude(best, design.design_lambda), best, i, j});
    }
    return row;
  });

  Layout layout{design, {}};
  for (const auto& row : rows) layout.sites.insert(layout.sites.end(), row.begin(), row.end());
  return layout;
}

optics::Mask layout_to_mask(const Layout& layout, int n, double pitch, double lambda) {
  const SWGDesign& design = layout.design;
  const double a = design.lattice_a;
  if (!(pitch <= a / 4.0)) {
    throw ValidationError(fmt::format("pixel pitch {} nm does not resolve the {} nm lattice (needs <= {} nm)",
                                      pitch * 1e9, a * 1e9, a / 4.0 * 1e9));
  }
  optics::Mask mask(n, pitch);
  if (layout.sites.empty()) return mask;

  const std::size_t levels = design.diameters_nm.size();
  std::vector<optics::cplx> level_value(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    level_value[k] = std::polar(design.lookup.amplitude(k, lambda), design.lookup.phase(k, lambda));
  }

  std::map<std::pair<int, int>, std::size_t> index;
  for (std::size_t s = 0; s < layout.sites.size(); ++s) index[{layout.sites[s].i, layout.sites[s].j}] = s;

  const double row_height = a * std::sqrt(3.0) / 2.0;
  const double radius = design.aperture_d / 2.0;
  auto site_xy = [&](int i, int j) { return std::pair{i * a + j * a / 2.0, j * row_height}; };

  const auto rows = parallel_map(static_cast<std::size_t>(n), [&](std::size_t row) {
    std::vector<optics::cplx> out(static_cast<std::size_t>(n));
    const double y = mask.coordinate(static_cast<int>(row));
    for (int col = 0; col < n; ++col) {
      const double x = mask.coordinate(col);
      if (x * x + y * y > radius * radius) continue;
      const double jf = y / row_height;
      const double if_ = (x - jf * a / 2.0) / a;
      const int i0 = static_cast<int>(std::floor(if_));
      const int j0 = static_cast<int>(std::floor(jf));
      // The nearest lattice point is a corner of the enclosing rhombus. Near
      // the rim that point may have been clipped, in which case the nearest
      // surviving pillar is searched for in a wider window.
      int ci = i0, cj = j0;
      double corner_d2 = std::numeric_limits<double>::infinity();
      for (int di = 0; di <= 1; ++di) {
        for (int dj = 0; dj <= 1; ++dj) {
          const auto [sx, sy] = site_xy(i0 + di, j0 + dj);
          const double d2 = (sx - x) * (sx - x) + (sy - y) * (sy - y);
          if (d2 < corner_d2) {
            corner_d2 = d2;
            ci = i0 + di;
            cj = j0 + dj;
          }
        }
      }
      std::size_t best = layout.sites.size();
      if (const auto it = index.find({ci, cj}); it != index.end()) {
        best = it->second;
      } else {
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int di = -2; di <= 2; ++di) {
          for (int dj = -2; dj <= 2; ++dj) {
            const auto found = index.find({ci + di, cj + dj});
            if (found == index.end()) continue;
            const auto [sx, sy] = site_xy(ci + di, cj + dj);
            const double d2 = (sx - x) * (sx - x) + (sy - y) * (sy - y);
            if (d2 < best_d2) {
              best_d2 = d2;
              best = found->second;
            }
          }
        }
      }
      if (best < layout.sites.size()) out[static_cast<std::size_t>(col)] = level_value[layout.sites[best].level];
    }
    return out;
  });

  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) mask.at(row, col) = rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
  }
  return mask;
}

void export_layout(const Layout& layout, std::ostream& out) {
  out << kLayoutHeader << '\n';
  for (const auto& s : layout.sites) {
    out << csv::join({csv::format_double(s.x), csv::format_double(s.y), csv::format_double(s.diameter_nm),
                      csv::format_double(s.phase), csv::format_double(s.amplitude)})
        << '\n';
  }
  if (!out) throw IoError("failed writing layout");
}

void export_layout(const Layout& layout, const std::filesystem::path& path) {
  csv::write_atomically(path, [&](std::ostream& out) { export_layout(layout, out); });
}

std::vector<PillarSite> read_layout(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  std::vector<PillarSite> sites;
  bool header = false;
  while (std::getline(in, line)) {
    ++row;
    const auto text = csv::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header) {
      if (text != kLayoutHeader) throw ParseError(row, fmt::format("expected header '{}'", kLayoutHeader));
      header = true;
      continue;
    }
    const auto fields = csv::split(text);
    if (fields.size() != 5) throw ParseError(row, fmt::format("expected 5 columns, found {}", fields.size()));
    PillarSite s;
    s.x = csv::parse_double(fields[0], row, "x_m");
    s.y = csv::parse_double(fields[1], row, "y_m");
    s.diameter_nm = csv::parse_double(fields[2], row, "diameter_nm");
    s.phase = csv::parse_double(fields[3], row, "phase_rad");
    s.amplitude = csv::parse_double(fields[4], row, "amplitude");
    sites.push_back(s);
  }
  if (!header) throw ParseError(row, "layout file has no header");
  return sites;
}

std::vector<PillarSite> read_layout(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open layout file {}", path.string()));
  return read_layout(in);
}

std::vector<std::size_t> diameter_histogram(const Layout& layout) {
  std::vector<std::size_t> counts(layout.design.diameters_nm.size(), 0);
  for (const auto& s : layout.sites) ++counts.at(s.level);
  return counts;
}

std::vector<WavelengthPoint> fidelity_vs_wavelength(const SWGDesign& design, const std::vector<double>& lambdas,
                                                    const BeamOptions& options) {
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0)) throw ValidationError("wavelengths must be positive");
    if (k && !(lambdas[k] > lambdas[k - 1])) throw ValidationError("wavelengths must be strictly increasing");
  }
  // Fail on out-of-range wavelengths before any heavy work.
  for (const double lambda : lambdas) design.lookup.phase(0, lambda);

  const Layout layout = generate_layout(design);
  const optics::LGIndex target{0, design.delta_l, options.w0};
  return parallel_map(lambdas.size(), [&](std::size_t k) {
    const double lambda = lambdas[k];
    const auto input = optics::make_gaussian(options.n, options.pitch, lambda, options.w0);
    const auto mask = layout_to_mask(layout, options.n, options.pitch, lambda);
    return WavelengthPoint{lambda, optics::conversion_metrics(input, mask, target, options.z_eval)};
  });
}

}  // namespace oam::swg
