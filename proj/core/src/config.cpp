#include "ivlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include "ivlab/error.hpp"
#include "text_util.hpp"

namespace ivlab {

namespace {

struct Field {
  std::function<void(AppConfig&, const std::string&)> set;
  std::function<std::string(const AppConfig&)> get;
};

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::Config, key + " expects a number, got '" + v + "'");
  }
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::Config, key + " expects a nonnegative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = detail::to_lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(ErrorCode::Config, key + " expects true or false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

// Field builders over an accessor returning a reference into AppConfig.
template <typename Access>
Field real(Access access) {
  return {[access](AppConfig& c, const std::string& v) { access(c) = to_double("", v); },
          [access](const AppConfig& c) { return fmt(access(const_cast<AppConfig&>(c))); }};
}

template <typename Int, typename Access>
Field integer(Access access) {
  return {[access](AppConfig& c, const std::string& v) { access(c) = to_int<Int>("", v); },
          [access](const AppConfig& c) { return std::to_string(access(const_cast<AppConfig&>(c))); }};
}

template <typename Access>
Field boolean(Access access) {
  return {[access](AppConfig& c, const std::string& v) { access(c) = to_bool("", v); },
          [access](const AppConfig& c) { return std::string(access(const_cast<AppConfig&>(c)) ? "true" : "false"); }};
}

template <typename Access>
Field text(Access access) {
  return {[access](AppConfig& c, const std::string& v) { access(c) = v; },
          [access](const AppConfig& c) { return access(const_cast<AppConfig&>(c)); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["preselect.tau"] = real([](AppConfig& c) -> double& { return c.pipeline.tau; });
    f["preselect.n_min"] = integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.n_min; });
    f["agents.i"] = integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.i; });
    f["agents.j"] = integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.j; });
    f["agents.temperature"] = real([](AppConfig& c) -> double& { return c.pipeline.agents.decoding.temperature; });
    f["agents.top_p"] = real([](AppConfig& c) -> double& { return c.pipeline.agents.decoding.top_p; });
    f["agents.max_tokens"] = integer<int>([](AppConfig& c) -> int& { return c.pipeline.agents.decoding.max_tokens; });
    f["agents.shortlist"] = integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.agents.shortlist; });
    f["agents.lexical_cap"] =
        integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.agents.lexical_cap; });
    f["agents.prompts_dir"] = text([](AppConfig& c) -> std::string& { return c.run.prompts_dir; });
    f["agents.max_reinvocations"] =
        integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.max_reinvocations; });
    f["granger.lag_policy"] = {
        [](AppConfig& c, const std::string& v) {
          if (v == "aic") {
            c.pipeline.lag_policy = LagPolicy::Aic;
          } else if (v == "fixed") {
            c.pipeline.lag_policy = LagPolicy::Fixed;
          } else {
            throw Error(ErrorCode::Config, "granger.lag_policy must be aic or fixed, got '" + v + "'");
          }
        },
        [](const AppConfig& c) { return std::string(c.pipeline.lag_policy == LagPolicy::Aic ? "aic" : "fixed"); }};
    f["granger.lag"] = integer<int>([](AppConfig& c) -> int& { return c.pipeline.lag; });
    f["granger.max_lag"] = integer<int>([](AppConfig& c) -> int& { return c.pipeline.max_lag; });
    f["granger.alpha"] = real([](AppConfig& c) -> double& { return c.pipeline.alpha; });
    f["granger.strict_direction"] = boolean([](AppConfig& c) -> bool& { return c.pipeline.strict_direction; });
    f["consistency.r"] = integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.consistency.r; });
    f["consistency.null_pairs"] =
        integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.consistency.null_pairs; });
    f["consistency.standardize"] = boolean([](AppConfig& c) -> bool& { return c.pipeline.consistency.standardize; });
    f["consistency.ate_bootstrap"] =
        integer<std::size_t>([](AppConfig& c) -> std::size_t& { return c.pipeline.ate_bootstrap; });
    f["recovery.flawed_threshold"] = real([](AppConfig& c) -> double& { return c.pipeline.flawed_threshold; });
    f["provider.kind"] = text([](AppConfig& c) -> std::string& { return c.provider.kind; });
    f["provider.script"] = text([](AppConfig& c) -> std::string& { return c.provider.script; });
    f["provider.transcript"] = text([](AppConfig& c) -> std::string& { return c.provider.transcript; });
    f["provider.record"] = text([](AppConfig& c) -> std::string& { return c.provider.record; });
    f["provider.endpoint"] = text([](AppConfig& c) -> std::string& { return c.provider.http.endpoint; });
    f["provider.model"] = text([](AppConfig& c) -> std::string& { return c.provider.http.model; });
    f["provider.embedding_model"] = text([](AppConfig& c) -> std::string& { return c.provider.http.embedding_model; });
    f["provider.api_key_env"] = text([](AppConfig& c) -> std::string& { return c.provider.http.api_key_env; });
    f["provider.requests_per_second"] =
        real([](AppConfig& c) -> double& { return c.provider.http.requests_per_second; });
    f["provider.max_retries"] = integer<int>([](AppConfig& c) -> int& { return c.provider.http.max_retries; });
    f["provider.timeout_seconds"] = integer<int>([](AppConfig& c) -> int& { return c.provider.http.timeout_seconds; });
    f["data.metadata"] = text([](AppConfig& c) -> std::string& { return c.data.metadata; });
    f["data.entity_column"] = text([](AppConfig& c) -> std::string& { return c.data.schema.entity; });
    f["data.time_column"] = text([](AppConfig& c) -> std::string& { return c.data.schema.time; });
    f["data.variable_column"] = text([](AppConfig& c) -> std::string& { return c.data.schema.variable; });
    f["data.value_column"] = text([](AppConfig& c) -> std::string& { return c.data.schema.value; });
    f["run.seed"] = integer<std::uint64_t>([](AppConfig& c) -> std::uint64_t& { return c.pipeline.seed; });
    f["run.output_dir"] = text([](AppConfig& c) -> std::string& { return c.run.output_dir; });
    return f;
  }();
  return table;
}

void finish(AppConfig& cfg, const std::set<std::string>& seen) {
  if (!seen.contains("provider.kind")) throw Error(ErrorCode::Config, "missing required key 'provider.kind'");
  cfg.pipeline.validate();
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, unused] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(AppConfig& cfg, const std::string& key, const std::string& value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw Error(ErrorCode::Config, "unknown key '" + key + "'");
  try {
    it->second.set(cfg, std::string(detail::trim(value)));
  } catch (const Error& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw Error(ErrorCode::Config, msg.rfind(key, 0) == 0 ? msg : key + msg);
  }
}

AppConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "config file '" + path + "' not found");
    throw Error(ErrorCode::Config, e.what());
  }
  AppConfig cfg;
  std::set<std::string> seen;
  const std::string base = std::filesystem::path(path).parent_path().string();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error(ErrorCode::Config, "key '" + section + "' must sit inside a section");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      std::string value = node.get_value<std::string>();
      // relative file settings resolve against the config file's directory
      static const std::set<std::string> paths{"provider.script", "provider.transcript", "provider.record",
                                               "data.metadata", "agents.prompts_dir"};
      if (paths.contains(full) && !value.empty() && std::filesystem::path(value).is_relative() && !base.empty()) {
        value = (std::filesystem::path(base) / value).lexically_normal().string();
      }
      apply_setting(cfg, full, value);
      seen.insert(full);
    }
  }
  for (const auto& [key, value] : overrides) {
    apply_setting(cfg, key, value);
    seen.insert(key);
  }
  finish(cfg, seen);
  return cfg;
}

AppConfig config_from_settings(const std::map<std::string, std::string>& settings) {
  AppConfig cfg;
  std::set<std::string> seen;
  for (const auto& [key, value] : settings) {
    apply_setting(cfg, key, value);
    seen.insert(key);
  }
  finish(cfg, seen);
  return cfg;
}

std::map<std::string, std::string> config_snapshot(const AppConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out[key] = field.get(cfg);
  return out;
}

}  // namespace ivlab
