#include "ivlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ivlab/error.hpp"
#include "text_util.hpp"

namespace ivlab {

namespace {

StageError stage_error(const std::string& stage, const std::string& subject, const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return {stage, subject, std::string(to_string(err->code())), err->what()};
  }
  return {stage, subject, "error", e.what()};
}

std::string describe_var(const PanelDataset& d, const std::string& name) {
  const auto& meta = d.variable(name);
  return meta.description.empty() ? name : name + " (" + meta.description + ")";
}

int granger_lag(const PanelDataset& d, const PipelineConfig& cfg, const std::string& cause, const std::string& effect) {
  return cfg.lag_policy == LagPolicy::Fixed ? cfg.lag : select_lag_aic(d, cause, effect, cfg.max_lag);
}

void screen_direction(const PanelDataset& d, const PipelineConfig& cfg, AgentRunner& agents, PairScreening& s,
                      DiscoveryReport& rep) {
  const std::string subject = s.pair.a + " ~ " + s.pair.b;
  try {
    s.judgment = agents.causal_direction(s.pair);
  } catch (const std::exception& e) {
    s.fate = "error";
    rep.errors.push_back(stage_error("causal_oracle", subject, e));
    return;
  }
  if (!s.judgment->directional()) {
    s.fate = "non_directional";
    return;
  }
  ++rep.counts.directional;
  const bool forward = s.judgment->verdict == Direction::ACausesB;
  const std::string& cause = forward ? s.pair.a : s.pair.b;
  const std::string& effect = forward ? s.pair.b : s.pair.a;
  try {
    s.granger = granger_test(d, cause, effect, granger_lag(d, cfg, cause, effect));
    bool agrees = s.granger->p_value < cfg.alpha;
    if (agrees && cfg.strict_direction) {
      s.granger_reverse = granger_test(d, effect, cause, granger_lag(d, cfg, effect, cause));
      agrees = s.granger_reverse->p_value >= cfg.alpha;
    }
    s.fate = agrees ? "retained" : "granger_disagrees";
  } catch (const std::exception& e) {
    s.fate = "error";
    rep.errors.push_back(stage_error("granger", subject, e));
  }
}

void search_instruments(const PanelDataset& d, const PipelineConfig& cfg, AgentRunner& agents, PairDiscovery& out) {
  std::vector<VariableMeta> vocab;
  for (const auto& m : d.variables()) {
    if (m.name != out.query.treatment && m.name != out.query.outcome) vocab.push_back(m);
  }
  const std::string subject = out.query.treatment + " -> " + out.query.outcome;
  if (vocab.empty()) {
    out.errors.push_back({"grounder", subject, "exhaustion error", "no variables left to ground instruments on"});
    return;
  }
  std::vector<std::string> avoid;
  std::set<std::string> grounded;
  for (std::size_t round = 0; round <= cfg.max_reinvocations; ++round) {
    out.reinvocations = round;
    InstrumentRound r;
    r.round = round;
    std::vector<std::string> proposals;
    try {
      proposals = agents.propose_instruments(out.query, cfg.i, avoid);
    } catch (const std::exception& e) {
      out.errors.push_back(stage_error("hypothesis_generator", subject, e));
      return;
    }
    for (const auto& text : proposals) {
      CandidateInstrument c;
      c.text = text;
      try {
        agents.critique(c, out.confounders, out.query);
        if (c.passes()) c.proxy = agents.ground_instrument(c.text, vocab);
      } catch (const std::exception& e) {
        out.errors.push_back(stage_error(c.exclusion == Verdict::Unevaluated || c.independence == Verdict::Unevaluated
                                             ? "critics"
                                             : "grounder",
                                         text, e));
      }
      if (c.proxy && grounded.insert(*c.proxy).second) {
        out.grounded.push_back(*c.proxy);
      } else if (!c.proxy) {
        avoid.push_back(c.text);
      }
      r.candidates.push_back(std::move(c));
    }
    out.rounds.push_back(std::move(r));
    if (!out.grounded.empty()) return;
  }
}

void estimate(const PanelDataset& d, const PipelineConfig& cfg, std::uint64_t pair_seed, PairDiscovery& out) {
  std::vector<std::string> estimable;
  for (std::size_t k = 0; k < out.grounded.size(); ++k) {
    const auto& proxy = out.grounded[k];
    try {
      out.estimates[proxy] = estimate_iv(d, out.query, proxy);
      estimable.push_back(proxy);
      if (cfg.ate_bootstrap > 0) {
        out.ate_samples[proxy] = bootstrap_iv(d, out.query, proxy, cfg.ate_bootstrap, detail::mix_seed(pair_seed, 10 + k));
      }
    } catch (const Error& e) {
      out.estimate_errors[proxy] = e.what();
    }
  }
  if (estimable.size() < 2) {
    out.status = "consistency-unevaluable";
    return;
  }
  ConsistencySettings settings = cfg.consistency;
  settings.seed = pair_seed;
  try {
    out.consistency = evaluate_consistency(d, out.query, estimable, settings);
    out.status = "evaluated";
  } catch (const std::exception& e) {
    out.errors.push_back(stage_error("consistency", out.query.treatment + " -> " + out.query.outcome, e));
    out.status = "consistency-unevaluable";
  }
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::Config, m); };
  if (!(tau > 0.0 && tau < 1.0)) fail("preselect.tau must lie in (0, 1)");
  if (i < 1) fail("agents.i must be at least 1");
  if (j < 1) fail("agents.j must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("granger.alpha must lie in (0, 1)");
  if (lag < 1) fail("granger.lag must be at least 1");
  if (max_lag < 1) fail("granger.max_lag must be at least 1");
  if (consistency.r < 1) fail("consistency.r must be at least 1");
  if (consistency.null_pairs < 1) fail("consistency.null_pairs must be at least 1");
  if (!(flawed_threshold >= -1.0 && flawed_threshold <= 1.0)) fail("recovery.flawed_threshold must lie in [-1, 1]");
}

std::vector<double> bootstrap_iv(const PanelDataset& d, const CausalQuery& q, const std::string& instrument,
                                 std::size_t draws, std::uint64_t seed) {
  const auto table = align_columns(d, {q.outcome, q.treatment, instrument});
  const std::size_t n = table.rows();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> y(n), t(n), z(n), out;
  out.reserve(draws);
  for (std::size_t b = 0; b < draws; ++b) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t k = pick(rng);
      y[r] = table.columns[0][k];
      t[r] = table.columns[1][k];
      z[r] = table.columns[2][k];
    }
    try {
      const double beta = two_stage_least_squares(y, t, z).beta;
      if (std::isfinite(beta)) out.push_back(beta);
    } catch (const Error&) {
      // degenerate resample
    }
  }
  return out;
}

DiscoveryReport run_discovery(const PanelDataset& d, const PipelineConfig& cfg, AgentRunner& agents) {
  cfg.validate();
  DiscoveryReport rep;
  std::vector<PairCandidate> pairs;
  try {
    pairs = preselect(d, cfg.tau, cfg.n_min, &rep.preselect);
  } catch (const std::exception& e) {
    rep.errors.push_back(stage_error("preselect", "", e));
  }
  rep.counts.preselected = pairs.size();
  if (pairs.empty()) {
    if (rep.errors.empty()) rep.errors.push_back({"preselect", "", "exhaustion error", "no pair passed preselection"});
    rep.trace = agents.trace();
    return rep;
  }

  const auto& vocab = d.variables();
  for (const auto& p : pairs) {
    PairScreening s;
    s.pair = p;
    try {
      if (agents.human_proxy_select({p}, vocab).empty()) {
        s.fate = "dropped_by_human_proxy";
      } else {
        ++rep.counts.human_kept;
        screen_direction(d, cfg, agents, s, rep);
      }
    } catch (const std::exception& e) {
      s.fate = "error";
      rep.errors.push_back(stage_error("human_proxy", p.a + " ~ " + p.b, e));
    }
    rep.screening.push_back(std::move(s));
  }
  if (rep.counts.human_kept == 0) {
    rep.errors.push_back({"human_proxy", "", "exhaustion error", "human proxy kept no pairs"});
  }

  for (const auto& s : rep.screening) {
    if (s.fate != "retained") continue;
    ++rep.counts.retained;
    PairDiscovery out;
    const bool forward = s.judgment->verdict == Direction::ACausesB;
    out.query.treatment = forward ? s.pair.a : s.pair.b;
    out.query.outcome = forward ? s.pair.b : s.pair.a;
    out.query.context = describe_var(d, out.query.treatment) + " and " + describe_var(d, out.query.outcome);
    out.rho = s.pair.rho;
    out.judgment = *s.judgment;
    out.granger = *s.granger;
    const std::uint64_t pair_seed =
        detail::mix_seed(cfg.seed, detail::fnv1a64(out.query.treatment + "->" + out.query.outcome));

    try {
      out.confounders = agents.propose_confounders(out.query, cfg.j);
      search_instruments(d, cfg, agents, out);
    } catch (const std::exception& e) {
      out.errors.push_back(stage_error("confounder_generator", out.query.treatment + " -> " + out.query.outcome, e));
    }
    if (out.grounded.empty() && !out.errors.empty()) {
      out.status = "failed";
    } else {
      estimate(d, cfg, pair_seed, out);
    }
    if (out.status == "evaluated") ++rep.counts.evaluated;
    rep.pairs.push_back(std::move(out));
  }
  rep.trace = agents.trace();
  return rep;
}

std::vector<RecoveryRow> run_recovery_benchmark(const std::vector<BenchmarkEntry>& entries, const PipelineConfig& cfg,
                                                AgentRunner& agents) {
  cfg.validate();
  std::vector<RecoveryRow> rows;
  for (const auto& entry : entries) {
    RecoveryRow row;
    row.entry = entry;
    try {
      row.suggestions = agents.propose_instruments(entry.query, cfg.i);
      const auto confounders = agents.propose_confounders(entry.query, cfg.j);
      for (const auto& text : row.suggestions) {
        CandidateInstrument c;
        c.text = text;
        agents.critique(c, confounders, entry.query);
        if (c.passes()) row.valid.push_back(c.text);
        row.candidates.push_back(std::move(c));
      }
      if (!row.valid.empty()) row.score = score_recovery(entry, row.valid, agents);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FlawedRow> run_flawed_benchmark(const std::vector<BenchmarkEntry>& entries, const PipelineConfig& cfg,
                                            AgentRunner& agents) {
  cfg.validate();
  std::vector<FlawedRow> rows;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& entry = entries[k];
    FlawedRow row;
    row.entry = entry;
    try {
      if (entry.flawed_ivs.empty()) throw Error(ErrorCode::Domain, "entry lists no flawed instrument");
      row.suggestions = agents.propose_instruments(entry.query, cfg.i);
      const auto confounders = agents.propose_confounders(entry.query, cfg.j);
      std::vector<CandidateInstrument> cands;
      for (const auto& text : row.suggestions) {
        CandidateInstrument c;
        c.text = text;
        cands.push_back(std::move(c));
      }
      row.injected = entry.flawed_ivs.front();
      cands = inject_flawed(std::move(cands), row.injected, detail::mix_seed(cfg.seed, k));
      for (auto& c : cands) agents.critique(c, confounders, entry.query);
      row.candidates = cands;
      row.score = score_flawed(entry, row.suggestions, row.candidates, agents.provider(), cfg.flawed_threshold);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ivlab
