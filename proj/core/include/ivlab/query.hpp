#pragma once

#include <string>

namespace ivlab {

/// Ordered treatment -> outcome question with free-text context.
struct CausalQuery {
  std::string treatment;
  std::string outcome;
  std::string context;
};

/// Throws Domain when treatment equals outcome or either is empty.
void validate(const CausalQuery& q);

}  // namespace ivlab
