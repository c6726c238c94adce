#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "oam/cli.hpp"
#include "oam/csv.hpp"
#include "oam/error.hpp"

#ifndef OAM_DATA_DIR
#define OAM_DATA_DIR "data"
#endif

namespace oam::cli {

namespace {

// Every recognised key with its default. An empty value means "unset".
const std::vector<std::pair<const char*, const char*>> kDefaults = {
    {"device.dataset", ""},
    {"device.branch", "hybrid-lower"},
    {"device.l_s_um", "10"},
    {"device.q_m", ""},

    {"environment.temperature_k", "4"},

    {"readout.lambda0_m", "1.428e-6"},
    {"readout.q_o", "1e6"},
    {"readout.dip_depth", "1"},
    {"readout.p_det_w", "1e-7"},
    {"readout.eta_qe", "1"},
    {"readout.p_dn_w_per_rthz", "2.5e-12"},
    {"readout.n_cav", "1e-3"},

    {"signal.lambda_m", "8.4e-7"},
    {"signal.delta_l", "1"},
    {"signal.eta_conv", "1"},
    {"signal.contrast", "1"},
    {"signal.mode", "cw"},
    {"signal.rep_rate_hz", "0"},
    {"signal.bandwidth_hz", "1"},

    {"sweep.l_s_min_um", ""},
    {"sweep.l_s_max_um", ""},
    {"sweep.l_s_step_um", "0.25"},
    {"sweep.n_cav_min", "1e-8"},
    {"sweep.n_cav_max", "1e2"},
    {"sweep.n_cav_points", "41"},

    {"mechanics.g_m_hz", "1.5e6"},
    {"mechanics.f_min_hz", "4e6"},
    {"mechanics.f_max_hz", "7e6"},
    {"mechanics.f_step_hz", "1e3"},
    {"mechanics.force_n", "1e-12"},
    {"mechanics.omega1_hz", ""},
    {"mechanics.omega2_hz", ""},
    {"mechanics.m1_kg", ""},
    {"mechanics.m2_kg", ""},

    {"swg.aperture_d_m", "2e-5"},
    {"swg.lattice_a_m", "3.6e-7"},
    {"swg.pillar_t_m", "4.5e-7"},
    {"swg.diameters_nm", "110,120,130,140,150,160,170,180,190,200,210"},
    {"swg.delta_l", "1"},
    {"swg.design_lambda_m", "8.4e-7"},
    {"swg.phase_increasing", "true"},

    {"optics.n", "1024"},
    {"optics.pitch_m", "5e-8"},
    {"optics.w0_m", "5e-6"},
    {"optics.z_eval_m", "0"},
    {"optics.lambda_m", "8.4e-7"},
    {"optics.ideal_vortex", "false"},
    {"optics.raster_stride", "4"},
    {"optics.l_min", "-20"},
    {"optics.l_max", "20"},
    {"optics.lambda_sweep_m", ""},

    {"fit.data", ""},
    {"fit.min_points", "3"},
};

std::string bundled(const char* file) { return (std::filesystem::path(OAM_DATA_DIR) / file).string(); }

Config from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
  Config c;
  for (const auto& [k, v] : pairs) c.set(k, v);
  return c;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& [k, v] : kDefaults) c.values_[k] = v;
  return c;
}

std::vector<std::string> Config::preset_names() { return {"paper-fig2b", "paper-fig5", "paper-fig8"}; }

Config Config::preset(std::string_view name) {
  const std::string dataset = bundled("sample_device.csv");
  if (name == "paper-fig2b") {
    return from_pairs({{"device.dataset", dataset},
                       {"device.l_s_um", "12"},
                       {"device.q_m", "500"},
                       {"mechanics.g_m_hz", "1.5e6"},
                       {"mechanics.f_min_hz", "4e6"},
                       {"mechanics.f_max_hz", "7e6"},
                       {"mechanics.f_step_hz", "1e3"}});
  }
  if (name == "paper-fig5") {
    return from_pairs({{"device.dataset", dataset},
                       {"device.branch", "hybrid-lower"},
                       {"device.l_s_um", "10"},
                       {"device.q_m", "1e6"},
                       {"environment.temperature_k", "4"},
                       {"readout.q_o", "1e6"},
                       {"readout.p_det_w", "1e-7"},
                       {"readout.n_cav", "1e-3"},
                       {"signal.delta_l", "1"},
                       {"signal.eta_conv", "0.83"},
                       {"signal.mode", "cw"}});
  }
  if (name == "paper-fig8") {
    return from_pairs({{"device.dataset", dataset},
                       {"device.branch", "hybrid-lower"},
                       {"device.l_s_um", "10"},
                       {"device.q_m", "1e8"},
                       {"environment.temperature_k", "0.01"},
                       {"readout.q_o", "1e6"},
                       {"readout.p_det_w", "1e-7"},
                       {"readout.n_cav", "1e-3"},
                       {"readout.p_dn_w_per_rthz", "3.8e-17"},
                       {"signal.delta_l", "10"},
                       {"signal.eta_conv", "0.83"},
                       {"signal.mode", "pulsed"},
                       {"signal.rep_rate_hz", "0"},
                       {"signal.bandwidth_hz", "1"}});
  }
  throw ConfigError(fmt::format("unknown preset '{}' (known: {})", name, fmt::join(preset_names(), ", ")));
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  std::string section;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find_first_of("#;");
    const auto text = csv::trim(std::string_view(line).substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3) {
        throw ConfigError(fmt::format("{}:{}: malformed section header", source, row));
      }
      section = std::string(csv::trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, row));
    }
    const std::string key(csv::trim(text.substr(0, eq)));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", source, row));
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.values_.count(full)) throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", source, row, full));
    c.values_[full] = std::string(csv::trim(text.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  Config c = parse(in, path.string());
  const auto dir = std::filesystem::absolute(path).parent_path();
  for (const auto& [k, v] : c.values_) c.base_dirs_[k] = dir;
  return c;
}

void Config::merge(const Config& over) {
  for (const auto& [k, v] : over.values_) {
    if (!values_.count(k)) throw ConfigError(fmt::format("unknown config key '{}'", k));
    values_[k] = v;
    if (auto it = over.base_dirs_.find(k); it != over.base_dirs_.end()) {
      base_dirs_[k] = it->second;
    } else {
      base_dirs_.erase(k);
    }
  }
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

bool Config::is_set(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

std::string Config::string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  return it->second;
}

double Config::number(const std::string& key) const {
  const auto v = optional_number(key);
  if (!v) throw ConfigError(fmt::format("missing required key '{}'", key));
  return *v;
}

std::optional<double> Config::optional_number(const std::string& key) const {
  const std::string text = string(key);
  if (text.empty()) return std::nullopt;
  try {
    const double v = csv::parse_double(text, 0, key);
    if (!std::isfinite(v)) throw ConfigError("");
    return v;
  } catch (const Error&) {
    throw ConfigError(fmt::format("key '{}': '{}' is not a finite number", key, text));
  }
}

int Config::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::round(v) || std::abs(v) > 1e9) {
    throw ConfigError(fmt::format("key '{}': expected an integer, got '{}'", key, string(key)));
  }
  return static_cast<int>(v);
}

bool Config::boolean(const std::string& key) const {
  const std::string v = lower(string(key));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(fmt::format("key '{}': expected a boolean, got '{}'", key, v));
}

std::vector<double> Config::numbers(const std::string& key) const {
  const std::string text = string(key);
  std::vector<double> out;
  if (csv::trim(text).empty()) return out;
  for (const auto& field : csv::split(text)) {
    try {
      out.push_back(csv::parse_double(csv::trim(field), 0, key));
    } catch (const Error&) {
      throw ConfigError(fmt::format("key '{}': '{}' is not a number", key, field));
    }
  }
  return out;
}

std::filesystem::path Config::path(const std::string& key) const {
  const std::string text = string(key);
  if (text.empty()) throw ConfigError(fmt::format("missing required key '{}'", key));
  std::filesystem::path p(text);
  if (p.is_relative()) {
    if (auto it = base_dirs_.find(key); it != base_dirs_.end()) p = it->second / p;
  }
  return p;
}

Config resolve_config(const std::optional<std::filesystem::path>& config_path,
                      const std::optional<std::string>& preset) {
  Config c = Config::defaults();
  if (preset) c.merge(Config::preset(*preset));
  if (config_path) c.merge(Config::load(*config_path));
  return c;
}

}  // namespace oam::cli
