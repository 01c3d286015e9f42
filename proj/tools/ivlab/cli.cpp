#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "ivlab/config.hpp"
#include "ivlab/consistency.hpp"
#include "ivlab/error.hpp"
#include "ivlab/granger.hpp"
#include "ivlab/panel.hpp"
#include "ivlab/pipeline.hpp"
#include "ivlab/report.hpp"
#include "ivlab/scm.hpp"

namespace ivlab::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw Error(ErrorCode::Usage, what + " path is required");
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::Usage, what + " '" + path + "' not found");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
}

PanelDataset load_dataset(const std::string& path, const DataSettings& data) {
  require_file(path, "dataset");
  PanelDataset d = load_panel(path, data.schema);
  if (!data.metadata.empty()) {
    require_file(data.metadata, "metadata");
    d = d.with_metadata(load_variable_metadata(data.metadata));
  }
  return d;
}

/// Options shared by the commands that run agents: the config file, one flag
/// per config key, and the common shortcuts.
struct AgentOptions {
  std::string config;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> flags;
  std::optional<std::uint64_t> seed;
  std::string provider;
  std::string transcript;
  std::string record;
  std::string out_dir;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config, "INI configuration file");
    cmd.add_option("--seed", seed, "Master seed (run.seed)");
    cmd.add_option("--provider", provider, "Provider kind: scripted, replay or http (provider.kind)");
    cmd.add_option("--transcript", transcript, "Replay this transcript (sets provider.kind = replay)");
    cmd.add_option("--record", record, "Append every provider call to this transcript");
    cmd.add_option("--out", out_dir, "Output directory (run.output_dir)");
    for (const auto& key : config_keys()) flags[key] = cmd.add_option("--" + key, values[key], "config " + key);
  }

  AppConfig resolve() const {
    std::map<std::string, std::string> overrides;
    for (const auto& [key, opt] : flags) {
      if (opt->count() > 0) overrides[key] = values.at(key);
    }
    if (seed) overrides["run.seed"] = std::to_string(*seed);
    if (!transcript.empty()) {
      overrides["provider.kind"] = "replay";
      overrides["provider.transcript"] = transcript;
    }
    if (!provider.empty()) overrides["provider.kind"] = provider;
    if (!record.empty()) overrides["provider.record"] = record;
    if (!out_dir.empty()) overrides["run.output_dir"] = out_dir;
    if (config.empty()) return config_from_settings(overrides);
    require_file(config, "config");
    return load_config(config, overrides);
  }

  TemplateSet templates(const AppConfig& cfg) const {
    return cfg.run.prompts_dir.empty() ? TemplateSet::builtin() : TemplateSet::from_directory(cfg.run.prompts_dir);
  }

  RunManifest manifest(const std::string& command, const AppConfig& cfg, const std::string& identity,
                       const std::vector<std::string>& inputs) const {
    RunManifest m;
    m.command = command;
    m.config = config_snapshot(cfg);
    m.seed = cfg.pipeline.seed;
    m.provider = identity;
    for (const auto& path : inputs) {
      if (!path.empty() && fs::is_regular_file(path)) m.input_digests[path] = sha256_file(path);
    }
    return m;
  }
};

int cmd_discover(const std::string& data_path, const AgentOptions& opts, std::ostream& out) {
  const AppConfig cfg = opts.resolve();
  const PanelDataset d = load_dataset(data_path, cfg.data);
  ProviderStack stack(cfg.provider);
  AgentRunner agents(stack.provider(), opts.templates(cfg), cfg.pipeline.agents);

  RunManifest manifest = opts.manifest("discover", cfg, stack.provider().identity(),
                                       {data_path, opts.config, cfg.data.metadata, cfg.provider.script,
                                        cfg.provider.transcript});
  manifest.started = report_timestamp();
  const DiscoveryReport report = run_discovery(d, cfg.pipeline, agents);
  manifest.finished = report_timestamp();

  const fs::path dir = cfg.run.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "'");
  write_file(dir / "report.json", render_document("discovery", to_json(report), manifest));
  write_file(dir / "summary.txt", discovery_summary(report));
  std::size_t sample_files = 0;
  for (const auto& p : report.pairs) {
    if (p.ate_samples.empty()) continue;
    write_file(dir / ("ate_samples_" + file_stem(p.query.treatment) + "__" + file_stem(p.query.outcome) + ".tsv"),
               ate_samples_tsv(p));
    ++sample_files;
  }
  out << discovery_summary(report);
  out << "\nwrote " << (dir / "report.json").string() << ", " << (dir / "summary.txt").string() << " and "
      << sample_files << " ATE sample file(s)\n";
  return kExitOk;
}

int cmd_benchmark(const std::string& file, const std::string& mode, const std::string& json_out,
                  const AgentOptions& opts, std::ostream& out) {
  const AppConfig cfg = opts.resolve();
  require_file(file, "benchmark");
  const auto entries = load_benchmark(file);
  ProviderStack stack(cfg.provider);
  AgentRunner agents(stack.provider(), opts.templates(cfg), cfg.pipeline.agents);
  RunManifest manifest = opts.manifest("benchmark " + mode, cfg, stack.provider().identity(),
                                       {file, opts.config, cfg.provider.script, cfg.provider.transcript});
  manifest.started = report_timestamp();
  std::string doc;
  if (mode == "recovery") {
    const auto rows = run_recovery_benchmark(entries, cfg.pipeline, agents);
    manifest.finished = report_timestamp();
    out << recovery_table(rows);
    doc = render_document("recovery", to_json(rows), manifest);
  } else {
    const auto rows = run_flawed_benchmark(entries, cfg.pipeline, agents);
    manifest.finished = report_timestamp();
    out << flawed_table(rows);
    doc = render_document("flawed", to_json(rows), manifest);
  }
  if (!json_out.empty()) write_file(json_out, doc);
  return kExitOk;
}

int cmd_estimate(const std::string& data_path, const std::string& metadata, const CausalQuery& q,
                 const std::string& instrument, const std::vector<std::string>& covariates, std::ostream& out) {
  DataSettings data;
  data.metadata = metadata;
  const PanelDataset d = load_dataset(data_path, data);
  validate(q);
  std::vector<std::string> names{q.outcome, q.treatment, instrument};
  names.insert(names.end(), covariates.begin(), covariates.end());
  const auto table = align_columns(d, names);
  std::vector<std::vector<double>> cov(table.columns.begin() + 3, table.columns.end());
  const IVEstimate est = two_stage_least_squares(table.columns[0], table.columns[1], table.columns[2], cov);
  out << "treatment      " << q.treatment << "\n"
      << "outcome        " << q.outcome << "\n"
      << "instrument     " << instrument << "\n"
      << "n              " << est.n << "\n"
      << "beta           " << num(est.beta) << "\n"
      << "se             " << num(est.se) << "\n"
      << "intercept      " << num(est.intercept) << "\n"
      << "first_stage_f  " << num(est.first_stage_f) << "\n";
  return kExitOk;
}

int cmd_consistency(const std::string& data_path, const CausalQuery& q, const std::vector<std::string>& instruments,
                    const ConsistencySettings& settings, std::ostream& out) {
  const PanelDataset d = load_dataset(data_path, {});
  const ConsistencyReport r = evaluate_consistency(d, q, instruments, settings);
  for (const auto& [name, est] : r.instrument_betas) {
    out << "beta[" << name << "]  " << num(est.beta) << "  (se " << num(est.se) << ", F "
        << num(est.first_stage_f) << ")\n";
  }
  for (const auto& name : r.skipped_instruments) out << "skipped        " << name << "\n";
  out << "delta_llm      " << num(r.delta_llm) << "\n"
      << "delta_rand     " << num(r.delta_rand_summary) << "\n"
      << "c_norm         " << num(r.c_norm) << "\n"
      << "p_value        " << num(r.p_value) << "\n"
      << "null_samples   " << r.null_samples.size() << "\n";
  return kExitOk;
}

int cmd_granger(const std::string& data_path, const std::string& cause, const std::string& effect,
                std::optional<int> lag, int max_lag, std::ostream& out) {
  const PanelDataset d = load_dataset(data_path, {});
  const int chosen = lag ? *lag : select_lag_aic(d, cause, effect, max_lag);
  const GrangerResult g = granger_test(d, cause, effect, chosen);
  out << "cause          " << cause << "\n"
      << "effect         " << effect << "\n"
      << "lag            " << g.lag << (lag ? "" : " (AIC)") << "\n"
      << "n              " << g.n << "\n"
      << "f_stat         " << num(g.f_stat) << "\n"
      << "df             " << g.df_num << ", " << g.df_den << "\n"
      << "p_value        " << num(g.p_value) << "\n";
  if (g.stationarity_warning) out << "warning        a series looks close to a unit root\n";
  return kExitOk;
}

void write_dataset(const std::string& path, const PanelDataset& d) {
  if (path.empty()) throw Error(ErrorCode::Usage, "--out is required");
  std::ostringstream buf;
  write_panel(buf, d);
  write_file(path, buf.str());
}

void write_metadata(const std::string& path, const PanelDataset& d) {
  std::ostringstream buf;
  buf << "name,description,unit\n";
  for (const auto& m : d.variables()) buf << m.name << ',' << m.description << ',' << m.unit << '\n';
  write_file(path, buf.str());
}

int handle_error(const Error& e, std::ostream& err) {
  err << "ivlab: " << e.what() << "\n";
  switch (e.code()) {
    case ErrorCode::Usage:
    case ErrorCode::Config:
    case ErrorCode::Io:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Instrumental-variable discovery and estimation toolkit", "ivlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ivlab 0.1.0");

  // discover
  auto* discover = app.add_subcommand("discover", "Run the discovery pipeline over a panel dataset");
  std::string data_path;
  AgentOptions discover_opts;
  discover->add_option("--data", data_path, "Long-format panel CSV")->required();
  discover_opts.attach(*discover);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "2SLS estimate for one instrument");
  CausalQuery est_q;
  std::string est_instrument, est_meta;
  std::vector<std::string> est_covariates;
  estimate->add_option("--data", data_path, "Long-format panel CSV")->required();
  estimate->add_option("--treatment", est_q.treatment)->required();
  estimate->add_option("--outcome", est_q.outcome)->required();
  estimate->add_option("--instrument", est_instrument)->required();
  estimate->add_option("--covariate", est_covariates, "Exogenous covariate (repeatable)");
  estimate->add_option("--metadata", est_meta, "Variable metadata CSV");

  // consistency
  auto* consistency = app.add_subcommand("consistency", "Consistency metric for a set of instruments");
  CausalQuery con_q;
  std::vector<std::string> con_instruments;
  ConsistencySettings con_settings;
  consistency->add_option("--data", data_path, "Long-format panel CSV")->required();
  consistency->add_option("--treatment", con_q.treatment)->required();
  consistency->add_option("--outcome", con_q.outcome)->required();
  consistency->add_option("--instrument", con_instruments, "Instrument variable (repeat for each)")->required();
  consistency->add_option("--seed", con_settings.seed);
  consistency->add_option("--r", con_settings.r, "Random pairs behind the baseline");
  consistency->add_option("--null-pairs", con_settings.null_pairs, "Random pairs behind the p-value");
  consistency->add_flag("--standardize", con_settings.standardize, "Standardize each sample before 2SLS");

  // granger
  auto* granger = app.add_subcommand("granger", "Granger causality test between two variables");
  std::string cause, effect;
  std::optional<int> lag;
  int max_lag = 4;
  granger->add_option("--data", data_path, "Long-format panel CSV")->required();
  granger->add_option("--cause", cause)->required();
  granger->add_option("--effect", effect)->required();
  granger->add_option("--lag", lag, "Fixed lag order (default: AIC scan)");
  granger->add_option("--max-lag", max_lag, "Upper bound of the AIC scan");

  // generate
  auto* generate = app.add_subcommand("generate", "Write synthetic datasets with known ground truth");
  generate->require_subcommand(1);
  std::string gen_out, gen_meta;
  auto* gen_scm = generate->add_subcommand("scm", "Linear confounded SCM with instruments");
  SCMSpec scm;
  std::vector<double> strengths{0.8}, leaks, loadings;
  gen_scm->add_option("--out", gen_out, "Output CSV")->required();
  gen_scm->add_option("--metadata", gen_meta, "Also write variable metadata here");
  gen_scm->add_option("--n", scm.n);
  gen_scm->add_option("--seed", scm.seed);
  gen_scm->add_option("--beta", scm.beta_star);
  gen_scm->add_option("--gamma-t", scm.gamma_t);
  gen_scm->add_option("--gamma-y", scm.gamma_y);
  gen_scm->add_option("--strength", strengths, "Instrument strengths, one per instrument");
  gen_scm->add_option("--leak", leaks, "Exclusion leaks, aligned with --strength");
  gen_scm->add_option("--loading", loadings, "Confounder loadings, aligned with --strength");
  gen_scm->add_option("--noise-vars", scm.noise_variables, "Independent noise columns");
  auto* gen_lagged = generate->add_subcommand("lagged", "Two series with planted Granger structure");
  LaggedSpec lagged;
  gen_lagged->add_option("--out", gen_out, "Output CSV")->required();
  gen_lagged->add_option("--n", lagged.n);
  gen_lagged->add_option("--entities", lagged.entities);
  gen_lagged->add_option("--gamma", lagged.gamma);
  gen_lagged->add_option("--cause-ar", lagged.cause_ar);
  gen_lagged->add_option("--effect-ar", lagged.effect_ar);
  gen_lagged->add_option("--seed", lagged.seed);
  auto* gen_binary = generate->add_subcommand("binary", "Binary instrument and treatment");
  BinarySpec binary;
  gen_binary->add_option("--out", gen_out, "Output CSV")->required();
  gen_binary->add_option("--n", binary.n);
  gen_binary->add_option("--beta", binary.beta_star);
  gen_binary->add_option("--seed", binary.seed);

  // benchmark
  auto* benchmark = app.add_subcommand("benchmark", "Instrument recovery or flawed-instrument benchmark");
  std::string bench_file, bench_mode, bench_json;
  AgentOptions bench_opts;
  benchmark->add_option("--file", bench_file, "Benchmark JSON")->required();
  benchmark->add_option("--mode", bench_mode, "recovery or flawed")
      ->required()
      ->check(CLI::IsMember({"recovery", "flawed"}));
  benchmark->add_option("--json", bench_json, "Also write the structured report here");
  bench_opts.attach(*benchmark);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*discover) return cmd_discover(data_path, discover_opts, out);
    if (*estimate) return cmd_estimate(data_path, est_meta, est_q, est_instrument, est_covariates, out);
    if (*consistency) return cmd_consistency(data_path, con_q, con_instruments, con_settings, out);
    if (*granger) return cmd_granger(data_path, cause, effect, lag, max_lag, out);
    if (*benchmark) return cmd_benchmark(bench_file, bench_mode, bench_json, bench_opts, out);
    if (*gen_scm) {
      scm.instruments.clear();
      for (std::size_t k = 0; k < strengths.size(); ++k) {
        InstrumentSpec z;
        z.strength = strengths[k];
        if (k < leaks.size()) z.exclusion_leak = leaks[k];
        if (k < loadings.size()) z.confounder_loading = loadings[k];
        scm.instruments.push_back(z);
      }
      const SCMData data = ivlab::generate(scm);
      write_dataset(gen_out, data.dataset);
      if (!gen_meta.empty()) write_metadata(gen_meta, data.dataset);
      out << "wrote " << gen_out << " (beta* = " << num(scm.beta_star) << ")\n";
      return kExitOk;
    }
    if (*gen_lagged) {
      write_dataset(gen_out, generate_lagged(lagged).dataset);
      out << "wrote " << gen_out << "\n";
      return kExitOk;
    }
    if (*gen_binary) {
      const BinaryData data = generate_binary(binary);
      PanelDataset::Builder b;
      b.add_variable({"y", "outcome", ""});
      b.add_variable({"t", "binary treatment", ""});
      b.add_variable({"z", "binary instrument", ""});
      for (std::size_t i = 0; i < data.y.size(); ++i) {
        b.add_observation("binary", static_cast<int>(i), "y", data.y[i]);
        b.add_observation("binary", static_cast<int>(i), "t", data.t[i]);
        b.add_observation("binary", static_cast<int>(i), "z", data.z[i]);
      }
      write_dataset(gen_out, std::move(b).build());
      out << "wrote " << gen_out << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    return handle_error(e, err);
  } catch (const std::exception& e) {
    err << "ivlab: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ivlab::cli
