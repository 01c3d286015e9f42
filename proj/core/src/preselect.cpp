#include "ivlab/preselect.hpp"

#include <algorithm>
#include <cmath>

#include "ivlab/error.hpp"

namespace ivlab {

std::vector<PairCandidate> preselect(const PanelDataset& d, double tau, std::size_t n_min,
                                     PreselectDiagnostics* diagnostics) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::Domain, "tau must lie in (0, 1)");
  if (n_min < 1) throw Error(ErrorCode::Domain, "n_min must be positive");
  PreselectDiagnostics diag;
  std::vector<PairCandidate> out;
  const auto names = d.variable_names();  // sorted, unique
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      ++diag.pairs_considered;
      PairCandidate pair{names[i], names[j], 0.0, 0};
      try {
        const auto aligned = align_pair(d, pair.a, pair.b);
        pair.n = aligned.n;
        pair.rho = pearson_correlation(aligned);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Lookup) throw;
        ++diag.pairs_skipped;
        continue;
      }
      if (!(std::abs(pair.rho) > tau)) {
        ++diag.below_tau;
      } else if (pair.n < n_min) {
        ++diag.below_n_min;
      } else {
        out.push_back(std::move(pair));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const PairCandidate& x, const PairCandidate& y) {
    const double ax = std::abs(x.rho), ay = std::abs(y.rho);
    if (ax != ay) return ax > ay;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  if (diagnostics) *diagnostics = diag;
  return out;
}

}  // namespace ivlab
