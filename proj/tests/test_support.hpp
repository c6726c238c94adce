#pragma once

#include <cmath>
#include <filesystem>
#include <random>

namespace oam::test {

inline std::filesystem::path data_dir() { return OAM_TEST_DATA_DIR; }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "oam_sense_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oam::test
