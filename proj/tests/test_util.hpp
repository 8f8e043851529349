#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace wdt_test {

// Scratch directory under the system temp root, wiped on creation.
inline std::filesystem::path test_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("wdt_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace wdt_test
