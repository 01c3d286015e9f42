#pragma once

#include <map>
#include <string>
#include <vector>

namespace ivlab {

/// Prompt templates keyed by name (instruments, confounders, exclusion,
/// independence, human_proxy, causal_direction, grounder, conceptual_match,
/// format_retry). Placeholders are written {Name}.
class TemplateSet {
 public:
  /// Templates compiled in from core/prompts at build time.
  static TemplateSet builtin();
  /// Built-in templates overridden by any `<name>.txt` found in `directory`.
  static TemplateSet from_directory(const std::string& directory);

  const std::string& text(const std::string& name) const;
  void set(const std::string& name, std::string text) { texts_[name] = std::move(text); }
  std::vector<std::string> names() const;

  /// Substitutes every {Name} in the template. Throws State when the template
  /// references a placeholder that `values` does not supply, so rendered
  /// prompts never contain unsubstituted placeholders.
  std::string render(const std::string& name, const std::map<std::string, std::string>& values) const;

 private:
  std::map<std::string, std::string> texts_;
};

/// Placeholder names referenced by a template text, in order of first use.
std::vector<std::string> placeholders(const std::string& text);

}  // namespace ivlab
