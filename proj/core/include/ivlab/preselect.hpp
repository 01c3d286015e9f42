#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ivlab/panel.hpp"

namespace ivlab {

/// Unordered variable pair with its complete-case correlation; a < b.
struct PairCandidate {
  std::string a;
  std::string b;
  double rho = 0.0;
  std::size_t n = 0;
};

struct PreselectDiagnostics {
  std::size_t pairs_considered = 0;
  std::size_t pairs_skipped = 0;  // alignment or correlation failed
  std::size_t below_tau = 0;
  std::size_t below_n_min = 0;
};

/// Pairs with |rho| > tau and n >= n_min, sorted by |rho| descending then by name.
std::vector<PairCandidate> preselect(const PanelDataset& d, double tau, std::size_t n_min,
                                     PreselectDiagnostics* diagnostics = nullptr);

}  // namespace ivlab
