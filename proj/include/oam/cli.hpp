#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oam/coupled_mechanics.hpp"
#include "oam/noise_budget.hpp"
#include "oam/swg_design.hpp"

namespace oam::cli {

/// Flat `section.key -> value` map. Files use INI-style `[section]` headers
/// and `key = value` lines; `#` and `;` start comments.
class Config {
 public:
  /// Built-in defaults; also the schema, since unknown keys are rejected.
  static Config defaults();
  static Config preset(std::string_view name);
  static std::vector<std::string> preset_names();

  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Copies every key of `over` on top of this one. Keys unknown to the
  /// defaults raise ConfigError.
  void merge(const Config& over);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  /// True when the key exists with a non-empty value.
  bool is_set(const std::string& key) const;

  std::string string(const std::string& key) const;
  double number(const std::string& key) const;
  std::optional<double> optional_number(const std::string& key) const;
  int integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  /// Path value; relative paths resolve against the directory of the file
  /// that set the key.
  std::filesystem::path path(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::filesystem::path> base_dirs_;
};

/// defaults <- preset (if any) <- config file (if any).
Config resolve_config(const std::optional<std::filesystem::path>& config_path,
                      const std::optional<std::string>& preset);

struct RunContext {
  Config config;
  std::filesystem::path out_dir = ".";
  std::ostream* log = nullptr;  // summary text; null silences it
};

struct PeakRow {
  double omega_hz = 0.0;
  double abs_x1 = 0.0;
  double abs_x2 = 0.0;
};

struct MechResponseResult {
  mech::CoupledOscillator::Params params;
  mech::ResponseCurve curve;
  std::vector<PeakRow> x1_peaks;
  std::vector<PeakRow> x2_peaks;
  std::vector<std::string> warnings;
  std::filesystem::path curve_file;
};

struct NoiseSweepRow {
  double l_s_um = 0.0;
  noise::NoiseBudget budget;
};

struct NoiseSweepResult {
  std::vector<NoiseSweepRow> rows;
  NoiseSweepRow argmin;
  NoiseSweepRow operating;  // at device.l_s_um
  std::filesystem::path sweep_file;
};

struct PulseBudgetResult {
  std::vector<NoiseSweepRow> vs_ls;
  noise::NcavOptimum vs_ncav;
  NoiseSweepRow best_ls;
  double n_min = 0.0;           // smallest over both sweeps
  bool interior_ncav_minimum = false;
  double rep_rate_hz = 0.0;     // at the operating point
  std::filesystem::path ls_file;
  std::filesystem::path ncav_file;
};

struct BeamSimResult {
  optics::ConversionMetrics metrics;
  optics::AzimuthalSpectrum spectrum;
  std::vector<swg::WavelengthPoint> wavelength_curve;
  bool ideal_vortex = false;
  std::vector<std::filesystem::path> files;
};

struct SwgGenResult {
  swg::Layout layout;
  std::vector<std::size_t> histogram;
  std::filesystem::path layout_file;
  std::filesystem::path histogram_file;
};

struct GmRow {
  double w_h_um = 0.0;
  std::optional<mech::GmFit> fit;
  std::string error;  // set when fit is empty
};

struct FitGmResult {
  std::vector<GmRow> rows;
  std::filesystem::path report_file;
};

MechResponseResult run_mech_response(const RunContext& ctx);
NoiseSweepResult run_noise_sweep(const RunContext& ctx);
PulseBudgetResult run_pulse_budget(const RunContext& ctx);
BeamSimResult run_beam_sim(const RunContext& ctx);
SwgGenResult run_swg_gen(const RunContext& ctx);
FitGmResult run_fit_gm(const RunContext& ctx);

/// Parses argv and dispatches; returns the process exit status.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace oam::cli
