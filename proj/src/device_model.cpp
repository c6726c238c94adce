#include "oam/device_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "oam/constants.hpp"
#include "oam/csv.hpp"
#include "oam/error.hpp"

namespace oam::device {

namespace {

constexpr std::array<std::pair<Branch, std::string_view>, 5> kBranchNames{{
    {Branch::twist_like, "twist-like"},
    {Branch::bounce_like, "bounce-like"},
    {Branch::hybrid_lower, "hybrid-lower"},
    {Branch::hybrid_upper, "hybrid-upper"},
    {Branch::see_saw, "see-saw"},
}};

bool record_less(const MechanicalModeRecord& a, const MechanicalModeRecord& b) {
  if (a.geometry.l_s_um != b.geometry.l_s_um) return a.geometry.l_s_um < b.geometry.l_s_um;
  return a.branch < b.branch;
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Ordinary-frequency value whose product with 2*pi reproduces `angular`
// exactly, so written tables re-parse bit-identically.
double hz_for_write(double angular) {
  double hz = angular / kTwoPi;
  for (int step = 0; step < 4 && kTwoPi * hz != angular; ++step) {
    const double up = std::nextafter(hz, std::numeric_limits<double>::infinity());
    const double down = std::nextafter(hz, -std::numeric_limits<double>::infinity());
    if (kTwoPi * up == angular) return up;
    if (kTwoPi * down == angular) return down;
    hz = kTwoPi * hz < angular ? up : down;
  }
  return hz;
}

}  // namespace

void DeviceGeometry::validate() const {
  if (!(l_s_um > 0 && w_h_um > 0 && l_h_um > 0 && slot_width_nm > 0 && thickness_nm > 0)) {
    throw ValidationError("geometry dimensions must be strictly positive");
  }
  if (!(slot_width_nm < 10.0 * thickness_nm)) {
    throw ValidationError("slot width must be below ten film thicknesses");
  }
}

std::string_view to_string(Branch b) {
  for (const auto& [branch, name] : kBranchNames) {
    if (branch == b) return name;
  }
  return "unknown";
}

std::optional<Branch> parse_branch(std::string_view text) {
  for (const auto& [branch, name] : kBranchNames) {
    if (name == text) return branch;
  }
  return std::nullopt;
}

void MechanicalModeRecord::validate() const {
  geometry.validate();
  if (!(omega_m > 0)) throw ValidationError("omega_m must be positive");
  if (!(m_eff > 0)) throw ValidationError("m_eff must be positive");
  if (!(r_eff > 0)) throw ValidationError("r_eff must be positive");
  if (!(q_m > 0)) throw ValidationError("q_m must be positive");
  if (!(g_om >= 0)) throw ValidationError("g_om must be non-negative");
  if (!std::isfinite(omega_m + m_eff + r_eff + q_m + g_om)) {
    throw ValidationError("mode parameters must be finite");
  }
}

DeviceDataset::DeviceDataset(std::vector<MechanicalModeRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  if (records_.empty()) throw ValidationError("dataset has no records");
  for (const auto& r : records_) r.validate();
  std::stable_sort(records_.begin(), records_.end(), record_less);
  for (std::size_t i = 1; i < records_.size(); ++i) {
    const auto& a = records_[i - 1];
    const auto& b = records_[i];
    if (a.branch == b.branch && a.geometry == b.geometry) {
      throw ValidationError(fmt::format("duplicate record for branch {} at l_s = {} um",
                                        to_string(b.branch), b.geometry.l_s_um));
    }
  }
}

bool DeviceDataset::has_branch(Branch b) const {
  return std::any_of(records_.begin(), records_.end(),
                     [b](const auto& r) { return r.branch == b; });
}

std::vector<Branch> DeviceDataset::branches() const {
  std::vector<Branch> out;
  for (const auto& [branch, name] : kBranchNames) {
    if (has_branch(branch)) out.push_back(branch);
  }
  return out;
}

std::vector<MechanicalModeRecord> DeviceDataset::branch_records(Branch b) const {
  std::vector<MechanicalModeRecord> out;
  for (const auto& r : records_) {
    if (r.branch == b) out.push_back(r);
  }
  return out;
}

std::pair<double, double> DeviceDataset::domain(Branch b) const {
  const auto recs = branch_records(b);
  if (recs.empty()) {
    throw DomainError(fmt::format("dataset has no '{}' branch", to_string(b)));
  }
  return {recs.front().geometry.l_s_um, recs.back().geometry.l_s_um};
}

DeviceDataset parse_dataset(std::istream& in) {
  std::vector<MechanicalModeRecord> records;
  std::string provenance;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  // Last l_s seen per branch, to enforce strictly increasing file order.
  std::map<Branch, std::pair<double, std::size_t>> last_ls;
  std::optional<std::pair<double, double>> hanger;

  while (std::getline(in, line)) {
    ++row;
    const auto text = csv::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      provenance += std::string(csv::trim(text.substr(1)));
      provenance += '\n';
      continue;
    }
    if (!have_header) {
      if (text != kDatasetHeader) {
        throw ParseError(row, fmt::format("expected header '{}'", kDatasetHeader));
      }
      have_header = true;
      continue;
    }
    const auto fields = csv::split(text);
    if (fields.size() != 9) {
      throw ParseError(row, fmt::format("expected 9 columns, found {}", fields.size()));
    }
    MechanicalModeRecord rec;
    rec.geometry.l_s_um = csv::parse_double(fields[0], row, "l_s_um");
    rec.geometry.w_h_um = csv::parse_double(fields[1], row, "w_h_um");
    rec.geometry.l_h_um = csv::parse_double(fields[2], row, "l_h_um");
    const auto branch = parse_branch(fields[3]);
    if (!branch) throw ParseError(row, fmt::format("unknown branch '{}'", fields[3]));
    rec.branch = *branch;
    rec.omega_m = kTwoPi * csv::parse_double(fields[4], row, "omega_m_hz");
    rec.m_eff = csv::parse_double(fields[5], row, "m_eff_kg");
    rec.r_eff = csv::parse_double(fields[6], row, "r_eff_m");
    rec.q_m = csv::parse_double(fields[7], row, "q_m");
    rec.g_om = kTwoPi * csv::parse_double(fields[8], row, "g_om_hz_per_m");

    try {
      rec.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), row);
    }
    const std::pair<double, double> this_hanger{rec.geometry.w_h_um, rec.geometry.l_h_um};
    if (!hanger) {
      hanger = this_hanger;
    } else if (*hanger != this_hanger) {
      throw ValidationError("all records must share one hanger geometry (w_h, l_h)", row);
    }
    if (auto it = last_ls.find(rec.branch); it != last_ls.end()) {
      if (rec.geometry.l_s_um == it->second.first) {
        throw ValidationError(fmt::format("duplicate record for branch {} at l_s = {} um (first at line {})",
                                          fields[3], rec.geometry.l_s_um, it->second.second),
                              row);
      }
      if (rec.geometry.l_s_um < it->second.first) {
        throw ValidationError(fmt::format("l_s not increasing within branch {}", fields[3]), row);
      }
    }
    last_ls[rec.branch] = {rec.geometry.l_s_um, row};
    records.push_back(rec);
  }
  if (!have_header) throw ParseError(row, "missing header row");
  if (records.empty()) throw ParseError(row, "no data rows");
  return DeviceDataset(std::move(records), std::move(provenance));
}

DeviceDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in);
}

void write_dataset(const DeviceDataset& dataset, std::ostream& out) {
  std::istringstream prov(dataset.provenance());
  for (std::string line; std::getline(prov, line);) out << "# " << line << '\n';
  out << kDatasetHeader << '\n';
  // Records are written branch-major so the per-branch ordering check holds
  // for any reader that streams the file.
  for (const auto b : dataset.branches()) {
    for (const auto& r : dataset.branch_records(b)) {
      out << csv::join({csv::format_double(r.geometry.l_s_um), csv::format_double(r.geometry.w_h_um),
                        csv::format_double(r.geometry.l_h_um), std::string(to_string(r.branch)),
                        csv::format_double(hz_for_write(r.omega_m)), csv::format_double(r.m_eff),
                        csv::format_double(r.r_eff), csv::format_double(r.q_m),
                        csv::format_double(hz_for_write(r.g_om))})
          << '\n';
    }
  }
}

void write_dataset(const DeviceDataset& dataset, const std::filesystem::path& path) {
  csv::write_atomically(path, [&](std::ostream& out) { write_dataset(dataset, out); });
}

double anticrossing_center(const DeviceDataset& dataset) {
  const auto lower = dataset.branch_records(Branch::hybrid_lower);
  const auto upper = dataset.branch_records(Branch::hybrid_upper);
  double best_gap = std::numeric_limits<double>::infinity();
  double best_ls = std::numeric_limits<double>::quiet_NaN();
  for (const auto& lo : lower) {
    for (const auto& hi : upper) {
      if (hi.geometry.l_s_um != lo.geometry.l_s_um) continue;
      const double gap = hi.omega_m - lo.omega_m;
      if (gap < best_gap) {
        best_gap = gap;
        best_ls = lo.geometry.l_s_um;
      }
    }
  }
  if (!std::isfinite(best_ls)) {
    throw DomainError("dataset needs hybrid-lower and hybrid-upper records at common l_s");
  }
  return best_ls;
}

MechanicalModeRecord interpolate(const DeviceDataset& dataset, Branch branch, double l_s_um,
                                 std::optional<double> q_m_override) {
  if (!dataset.has_branch(branch) &&
      (branch == Branch::twist_like || branch == Branch::bounce_like) &&
      dataset.has_branch(Branch::hybrid_lower) && dataset.has_branch(Branch::hybrid_upper)) {
    const bool past_crossing = l_s_um >= anticrossing_center(dataset);
    const bool twist = branch == Branch::twist_like;
    auto rec = interpolate(dataset, past_crossing == twist ? Branch::hybrid_lower : Branch::hybrid_upper,
                           l_s_um, q_m_override);
    rec.branch = branch;
    return rec;
  }

  const auto recs = dataset.branch_records(branch);
  if (recs.empty()) {
    throw DomainError(fmt::format("dataset has no '{}' branch", to_string(branch)));
  }
  const double lo = recs.front().geometry.l_s_um;
  const double hi = recs.back().geometry.l_s_um;
  if (!(l_s_um >= lo && l_s_um <= hi)) {
    throw DomainError(fmt::format("l_s = {} um outside [{}, {}] um for branch {}", l_s_um, lo, hi,
                                  to_string(branch)));
  }

  auto upper = std::lower_bound(recs.begin(), recs.end(), l_s_um,
                                [](const auto& r, double x) { return r.geometry.l_s_um < x; });
  MechanicalModeRecord out;
  if (upper->geometry.l_s_um == l_s_um) {
    out = *upper;
  } else {
    const auto& a = *(upper - 1);
    const auto& b = *upper;
    const double t = (l_s_um - a.geometry.l_s_um) / (b.geometry.l_s_um - a.geometry.l_s_um);
    out = a;
    out.geometry.l_s_um = l_s_um;
    out.omega_m = lerp(a.omega_m, b.omega_m, t);
    out.m_eff = lerp(a.m_eff, b.m_eff, t);
    out.r_eff = lerp(a.r_eff, b.r_eff, t);
    out.q_m = lerp(a.q_m, b.q_m, t);
    out.g_om = lerp(a.g_om, b.g_om, t);
  }
  if (q_m_override) {
    if (!(*q_m_override > 0)) throw ValidationError("Q_m override must be positive");
    out.q_m = *q_m_override;
  }
  return out;
}

}  // namespace oam::device
