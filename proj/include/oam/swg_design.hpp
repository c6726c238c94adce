#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "oam/beam_optics.hpp"

namespace oam::swg {

/// Per-diameter phase (rad) and amplitude, tabulated on a wavelength grid and
/// interpolated linearly between grid points.
class LookupTable {
 public:
  LookupTable() = default;
  /// phases[w][k] and amplitudes[w][k] for wavelength w and diameter k.
  LookupTable(std::vector<double> wavelengths, std::vector<std::vector<double>> phases,
              std::vector<std::vector<double>> amplitudes);

  const std::vector<double>& wavelengths() const { return wavelengths_; }
  std::size_t levels() const { return phases_.empty() ? 0 : phases_.front().size(); }
  /// Throws DomainError outside the tabulated range.
  double phase(std::size_t level, double lambda) const;
  double amplitude(std::size_t level, double lambda) const;

 private:
  std::pair<std::size_t, double> locate(double lambda) const;

  std::vector<double> wavelengths_;
  std::vector<std::vector<double>> phases_;
  std::vector<std::vector<double>> amplitudes_;
};

inline constexpr double kDefaultTransmission = 0.92;  // |amplitude|^2 of every pillar

/// Effective-medium stand-in: an 11-level ramp over [0, 2pi 10/11] at the
/// design wavelength, uniform amplitude sqrt(0.92), and a span that shrinks
/// linearly with wavelength. `phase_increasing = false` runs the ramp the
/// other way round the circle. Table covers 700..1000 nm.
LookupTable default_lookup(double design_lambda, std::size_t levels = 11, bool phase_increasing = true);

struct SWGDesign {
  double aperture_d = 20e-6;  // m
  double lattice_a = 360e-9;  // m
  double pillar_t = 450e-9;   // m
  std::vector<double> diameters_nm = {110, 120, 130, 140, 150, 160, 170, 180, 190, 200, 210};
  int delta_l = 1;
  double design_lambda = 840e-9;
  LookupTable lookup = default_lookup(840e-9);

  void validate() const;
};

struct PillarSite {
  double x = 0.0;  // m
  double y = 0.0;  // m
  double diameter_nm = 0.0;
  double phase = 0.0;  // rad, at the design wavelength
  double amplitude = 0.0;
  std::size_t level = 0;  // index into diameters_nm
  int i = 0;              // lattice indices: r = i a1 + j a2
  int j = 0;
};

struct Layout {
  SWGDesign design;
  std::vector<PillarSite> sites;  // sorted by (y, x)
};

/// Hexagonal lattice with a1 along +x and a pillar on the origin, clipped to
/// sites whose centre lies inside the aperture. Each site gets the lookup
/// level whose design-wavelength phase is closest (on the circle) to
/// wrap(delta_l * azimuth).
Layout generate_layout(const SWGDesign& design);

/// Nearest-pillar rasterization at `lambda`. Requires pitch <= lattice_a / 4.
optics::Mask layout_to_mask(const Layout& layout, int n, double pitch, double lambda);

inline constexpr const char* kLayoutHeader = "x_m,y_m,diameter_nm,phase_rad,amplitude";

void export_layout(const Layout& layout, std::ostream& out);
void export_layout(const Layout& layout, const std::filesystem::path& path);
/// Reads back the five exported columns; lattice indices and levels are not
/// part of the file and are left at zero.
std::vector<PillarSite> read_layout(std::istream& in);
std::vector<PillarSite> read_layout(const std::filesystem::path& path);

/// Site count per entry of diameters_nm.
std::vector<std::size_t> diameter_histogram(const Layout& layout);

struct BeamOptions {
  int n = 1024;
  double pitch = 50e-9;
  double w0 = 5e-6;
  double z_eval = 0.0;
};

struct WavelengthPoint {
  double lambda = 0.0;
  optics::ConversionMetrics metrics;
};

/// Gaussian through the layout mask, scored against LG_{0, delta_l} at each
/// wavelength. Lambdas must be positive and strictly increasing.
std::vector<WavelengthPoint> fidelity_vs_wavelength(const SWGDesign& design, const std::vector<double>& lambdas,
                                                    const BeamOptions& options = {});

}  // namespace oam::swg
