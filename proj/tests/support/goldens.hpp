// Copyright (c) 2026 the masa authors
// SPDX-License-Identifier: Apache-2.0

// First-run measurements frozen into tests/data/goldens.json. The acceptance
// binary writes the file with --freeze; tests fail loudly when it is absent.

#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "masa/common.hpp"

namespace golden {

inline std::string data_dir() {
  if (const char* env = std::getenv("MASA_TEST_DATA")) return env;
  for (const char* probe : {"tests/data", "../tests/data", "../../tests/data", "data"})
    if (std::filesystem::exists(std::filesystem::path(probe) / "goldens.json") ||
        std::filesystem::is_directory(probe))
      return probe;
  return "tests/data";
}

inline std::string goldens_path() { return data_dir() + "/goldens.json"; }

inline nlohmann::json load() {
  std::ifstream in(goldens_path());
  if (!in)
    throw masa::IoError("goldens file '" + goldens_path() +
                        "' not found; run masa_acceptance --freeze once to record it");
  nlohmann::json j;
  in >> j;
  return j;
}

inline std::uint64_t parse_hex(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

inline std::string to_hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace golden
