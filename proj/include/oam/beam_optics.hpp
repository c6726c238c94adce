#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

namespace oam::optics {

using cplx = std::complex<double>;

/// Square n x n complex grid, row-major, pixel (n/2, n/2) on the optical axis.
class ComplexGrid {
 public:
  ComplexGrid(int n, double pitch);
  ComplexGrid(int n, double pitch, std::vector<cplx> values);

  int n() const { return n_; }
  double pitch() const { return pitch_; }
  /// Transverse coordinate (m) of row or column `index`.
  double coordinate(int index) const { return (index - n_ / 2) * pitch_; }

  cplx& at(int row, int col) { return values_[static_cast<std::size_t>(row) * n_ + col]; }
  const cplx& at(int row, int col) const { return values_[static_cast<std::size_t>(row) * n_ + col]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }

  bool same_grid(const ComplexGrid& other) const { return n_ == other.n_ && pitch_ == other.pitch_; }

 private:
  int n_;
  double pitch_;
  std::vector<cplx> values_;
};

/// Pixel-wise complex transmission.
using Mask = ComplexGrid;

/// Monochromatic scalar field sampled on a ComplexGrid.
class ScalarField : public ComplexGrid {
 public:
  ScalarField(int n, double pitch, double wavelength);
  ScalarField(int n, double pitch, double wavelength, std::vector<cplx> values);

  double wavelength() const { return wavelength_; }
  /// Sum |a|^2 pitch^2.
  double power() const;
  /// Copy scaled to unit power.
  ScalarField normalized() const;

 private:
  double wavelength_;
};

struct LGIndex {
  int p = 0;
  int l = 0;
  double w0 = 0.0;
};

/// Unit-power Gaussian at its waist. Requires w0 >= 4 pitch.
ScalarField make_gaussian(int n, double pitch, double wavelength, double w0);

/// Unit-power LG_{p,l} at its waist:
/// (sqrt2 r/w0)^|l| L_p^|l|(2 r^2/w0^2) exp(-r^2/w0^2) exp(i l phi).
ScalarField make_lg(int n, double pitch, double wavelength, const LGIndex& idx);

/// exp(i delta_l phi) about the grid centre.
Mask vortex_mask(int n, double pitch, int delta_l);

/// Vortex phase quantized to `levels` equal steps (nearest level).
Mask staircase_vortex_mask(int n, double pitch, int delta_l, int levels);

/// 1 inside radius, 0 outside.
Mask aperture_mask(int n, double pitch, double radius);

ScalarField apply_mask(const ScalarField& field, const Mask& mask);

struct PropagationReport {
  /// False when spectral content beyond the sampling limit of the transfer
  /// function exceeds 1e-6 of the total.
  bool band_limited = true;
  double aliased_fraction = 0.0;
  /// Power carried by evanescent components (discarded).
  double evanescent_fraction = 0.0;
};

/// Angular-spectrum propagation over z metres. Evanescent components are
/// zeroed for either sign of z.
ScalarField propagate(const ScalarField& field, double z, PropagationReport* report = nullptr);

/// |<a, b>|^2 / (<a,a><b,b>). Throws DomainError on zero power or mismatched grids.
double fidelity(const ComplexGrid& field, const ComplexGrid& reference);

/// Power fractions per azimuthal order, from harmonic projection on rings of
/// radius (k + 1/2) pitch.
struct AzimuthalSpectrum {
  int l_min = 0;
  std::vector<double> fraction;

  int l_max() const { return l_min + static_cast<int>(fraction.size()) - 1; }
  double at(int l) const;
  double total() const;
  int dominant() const;
};

AzimuthalSpectrum azimuthal_spectrum(const ComplexGrid& field, int l_min, int l_max);

struct ConversionMetrics {
  double fidelity = 0.0;             // waist-optimized
  double fidelity_fixed_waist = 0.0; // reference at target.w0
  double best_waist = 0.0;           // m
  double transmission = 0.0;         // T_swg
  double efficiency = 0.0;           // fidelity * transmission
};

/// Best-overlap reference waist by golden-section search on [lo, hi].
double optimize_reference_waist(const ScalarField& field, int p, int l, double lo, double hi,
                                double* best_fidelity = nullptr);

/// Applies `mask` to `input`, propagates by z_eval, and scores the result
/// against LG(target). The overlap is taken in the mask plane: propagation is
/// unitary, so a reference propagated the same distance scores identically.
ConversionMetrics conversion_metrics(const ScalarField& input, const Mask& mask, const LGIndex& target,
                                     double z_eval, ScalarField* output = nullptr);

/// `x_m,y_m,re,im`, one row per pixel.
void write_field(const ScalarField& field, std::ostream& out);
/// Sidecar for write_field: n, pitch and wavelength.
void write_field_header(const ScalarField& field, std::ostream& out);

enum class RasterKind { intensity, phase };
/// Comma-separated matrix, every `stride`-th row and column.
void write_raster(const ComplexGrid& field, RasterKind kind, int stride, std::ostream& out);

}  // namespace oam::optics
