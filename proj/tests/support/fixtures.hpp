#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ivlab/error.hpp"
#include "ivlab/panel.hpp"

// Asserts that `stmt` throws ivlab::Error with the given code.
#define EXPECT_IVLAB_ERROR(stmt, ec)                                            \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "expected " << ivlab::to_string(ec) << " from " #stmt; \
    } catch (const ivlab::Error& e_) {                                          \
      EXPECT_EQ(e_.code(), ec) << e_.what();                                    \
    }                                                                           \
  } while (0)

namespace fixture {

/// Single-entity panel with time 0..n-1 and one variable per column.
inline ivlab::PanelDataset panel(const std::map<std::string, std::vector<double>>& columns) {
  ivlab::PanelDataset::Builder b;
  for (const auto& [name, values] : columns) {
    b.add_variable({name, name, ""});
    for (std::size_t i = 0; i < values.size(); ++i) b.add_observation("e", static_cast<int>(i), name, values[i]);
  }
  return std::move(b).build();
}

inline ivlab::PanelDataset from_csv(const std::string& text) {
  std::istringstream in(text);
  return ivlab::load_panel(in);
}

inline std::string data_path(const std::string& relative) { return std::string(IVLAB_DATA_DIR) + "/" + relative; }

/// Fresh directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ivlab_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixture
