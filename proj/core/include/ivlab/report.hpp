#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ivlab/pipeline.hpp"

namespace ivlab {

inline constexpr int kReportSchemaVersion = 1;

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::string provider;
  std::map<std::string, std::string> input_digests;  // path -> sha256
  std::string started;
  std::string finished;
};

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// UTC ISO-8601 time. Honours SOURCE_DATE_EPOCH so reruns can be byte-identical.
std::string report_timestamp();

nlohmann::json to_json(const RunManifest& m);
nlohmann::json to_json(const GrangerResult& g);
nlohmann::json to_json(const IVEstimate& e);
nlohmann::json to_json(const ConsistencyReport& r);
nlohmann::json to_json(const CandidateInstrument& c);
nlohmann::json to_json(const DiscoveryReport& r);
nlohmann::json to_json(const std::vector<RecoveryRow>& rows);
nlohmann::json to_json(const std::vector<FlawedRow>& rows);

/// {"schema_version", "manifest", "<kind>": body}, pretty-printed with a trailing newline.
std::string render_document(const std::string& kind, const nlohmann::json& body, const RunManifest& m);

/// Plain-text tables for humans.
std::string discovery_summary(const DiscoveryReport& r);
std::string recovery_table(const std::vector<RecoveryRow>& rows);
std::string flawed_table(const std::vector<FlawedRow>& rows);

/// Two-column text ("instrument<TAB>beta") of bootstrap 2SLS draws.
std::string ate_samples_tsv(const PairDiscovery& p);

/// File-name-safe rendering of a variable name.
std::string file_stem(const std::string& name);

}  // namespace ivlab
