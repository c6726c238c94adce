#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oam::device {

/// Hanger/support geometry of one simulated device. Lengths in the units the
/// dataset file uses (µm for lengths, nm for film dimensions).
struct DeviceGeometry {
  double l_s_um = 0.0;
  double w_h_um = 0.0;
  double l_h_um = 0.0;
  double slot_width_nm = 100.0;
  double thickness_nm = 370.0;

  void validate() const;
  friend bool operator==(const DeviceGeometry&, const DeviceGeometry&) = default;
};

enum class Branch { twist_like, bounce_like, hybrid_lower, hybrid_upper, see_saw };

std::string_view to_string(Branch b);
std::optional<Branch> parse_branch(std::string_view text);

/// One mechanical branch at one geometry point. SI throughout: omega_m and
/// g_om are angular (rad/s and rad/s per metre).
struct MechanicalModeRecord {
  DeviceGeometry geometry;
  Branch branch = Branch::hybrid_lower;
  double omega_m = 0.0;
  double m_eff = 0.0;
  double r_eff = 0.0;
  double q_m = 0.0;
  double g_om = 0.0;

  void validate() const;
  friend bool operator==(const MechanicalModeRecord&, const MechanicalModeRecord&) = default;
};

/// Immutable table of mode records sorted by (l_s, branch).
class DeviceDataset {
 public:
  DeviceDataset(std::vector<MechanicalModeRecord> records, std::string provenance);

  const std::vector<MechanicalModeRecord>& records() const { return records_; }
  const std::string& provenance() const { return provenance_; }

  bool has_branch(Branch b) const;
  std::vector<Branch> branches() const;
  /// Records of one branch in increasing l_s.
  std::vector<MechanicalModeRecord> branch_records(Branch b) const;
  /// Closed interpolation interval [min l_s, max l_s] in µm.
  std::pair<double, double> domain(Branch b) const;

  friend bool operator==(const DeviceDataset&, const DeviceDataset&) = default;

 private:
  std::vector<MechanicalModeRecord> records_;
  std::string provenance_;
};

inline constexpr std::string_view kDatasetHeader =
    "l_s_um,w_h_um,l_h_um,branch,omega_m_hz,m_eff_kg,r_eff_m,q_m,g_om_hz_per_m";

DeviceDataset parse_dataset(std::istream& in);
DeviceDataset load_dataset(const std::filesystem::path& path);
void write_dataset(const DeviceDataset& dataset, std::ostream& out);
void write_dataset(const DeviceDataset& dataset, const std::filesystem::path& path);

/// Piecewise-linear interpolation in l_s of omega_m, m_eff, r_eff, g_om (and
/// q_m unless overridden). Knots are reproduced exactly.
///
/// twist-like / bounce-like requests on a table that only carries hybrid
/// branches are resolved by mode character: the twist frequency falls with
/// l_s, so beyond the anti-crossing the twist-like mode is the lower branch.
MechanicalModeRecord interpolate(const DeviceDataset& dataset, Branch branch, double l_s_um,
                                 std::optional<double> q_m_override = std::nullopt);

/// l_s (µm) of the knot with the smallest hybrid-upper minus hybrid-lower gap.
double anticrossing_center(const DeviceDataset& dataset);

}  // namespace oam::device
