#include "ivlab/agents.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "ivlab/error.hpp"
#include "text_util.hpp"

namespace ivlab {

namespace {

std::string problem_of(const Error& e) {
  const std::string what = e.what();
  const auto colon = what.find(": ");
  return colon == std::string::npos ? what : what.substr(colon + 2);
}

std::string describe(const VariableMeta& m) {
  return m.description.empty() ? m.name : m.name + ": " + m.description;
}

const VariableMeta* find_meta(const std::vector<VariableMeta>& vocab, const std::string& name) {
  for (const auto& m : vocab) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::map<std::string, std::string> query_values(const CausalQuery& q) {
  return {{"T", q.treatment}, {"Y", q.outcome}, {"Context", q.context}};
}

}  // namespace

const char* to_string(Provenance p) noexcept { return p == Provenance::Injected ? "injected" : "generated"; }

const char* to_string(Direction d) noexcept {
  switch (d) {
    case Direction::ACausesB: return "a_causes_b";
    case Direction::BCausesA: return "b_causes_a";
    case Direction::Bidirectional: return "bidirectional";
    case Direction::NoLink: return "no_link";
  }
  return "no_link";
}

AgentRunner::AgentRunner(Provider& provider, TemplateSet templates, AgentSettings settings)
    : provider_(provider), templates_(std::move(templates)), settings_(settings) {}

void AgentRunner::ask(const std::string& prompt, const std::function<void(const AnswerParts&)>& parse,
                      std::string* rationale) {
  std::string reply = provider_.complete(prompt, settings_.decoding);
  std::string problem;
  try {
    const AnswerParts parts = split_answer(reply);
    parse(parts);
    if (rationale) *rationale = parts.rationale;
    return;
  } catch (const ParseError& e) {
    problem = problem_of(e);
  }
  const std::string retry = templates_.render("format_retry", {{"Prompt", prompt}, {"Problem", problem}});
  reply = provider_.complete(retry, settings_.decoding);
  try {
    const AnswerParts parts = split_answer(reply);
    parse(parts);
    if (rationale) *rationale = parts.rationale;
  } catch (const ParseError& e) {
    throw ParseError(problem_of(e) + " (after one re-prompt)", reply);
  }
}

std::vector<std::string> AgentRunner::ask_list(const std::string& template_name,
                                               const std::map<std::string, std::string>& values,
                                               std::size_t count) {
  if (count < 1) throw Error(ErrorCode::Domain, "requested list size must be at least 1");
  std::vector<std::string> items;
  ask(templates_.render(template_name, values),
      [&](const AnswerParts& parts) {
        auto parsed = parse_list(parts.body);
        if (parsed.size() < count) {
          throw ParseError("expected " + std::to_string(count) + " distinct items, got " +
                               std::to_string(parsed.size()),
                           parts.body);
        }
        parsed.resize(count);
        items = std::move(parsed);
      },
      nullptr);
  return items;
}

Verdict AgentRunner::ask_verdict(const std::string& template_name, const std::map<std::string, std::string>& values,
                                 std::string* rationale) {
  Verdict v = Verdict::Unevaluated;
  ask(templates_.render(template_name, values), [&](const AnswerParts& parts) { v = parse_verdict(parts.body); },
      rationale);
  return v;
}

int AgentRunner::ask_choice(const std::string& template_name, const std::map<std::string, std::string>& values,
                            int lo, int hi, std::string* rationale) {
  int choice = 0;
  ask(templates_.render(template_name, values),
      [&](const AnswerParts& parts) { choice = parse_choice(parts.body, lo, hi); }, rationale);
  return choice;
}

std::vector<std::string> AgentRunner::propose_instruments(const CausalQuery& q, std::size_t i,
                                                          const std::vector<std::string>& avoid) {
  validate(q);
  auto values = query_values(q);
  values["N"] = std::to_string(i);
  if (!avoid.empty()) {
    values["Context"] += " Avoid proposing these previously rejected instruments: " + detail::join(avoid, "; ") + ".";
  }
  auto items = ask_list("instruments", values, i);
  trace_.events.push_back({"hypothesis_generator", q.treatment + " -> " + q.outcome, detail::join(items, "; "), ""});
  return items;
}

std::vector<std::string> AgentRunner::propose_confounders(const CausalQuery& q, std::size_t j) {
  validate(q);
  auto values = query_values(q);
  values["N"] = std::to_string(j);
  auto items = ask_list("confounders", values, j);
  if (j == 1) {
    trace_.diagnostics.push_back("weak_independence_context: a single confounder backs the independence critique for " +
                                 q.treatment + " -> " + q.outcome);
  }
  trace_.events.push_back({"confounder_generator", q.treatment + " -> " + q.outcome, detail::join(items, "; "), ""});
  return items;
}

Verdict AgentRunner::critique_exclusion(const std::string& z, const CausalQuery& q, std::string* rationale) {
  if (detail::trim(z).empty()) throw Error(ErrorCode::Domain, "candidate instrument text is empty");
  auto values = query_values(q);
  values["Z"] = z;
  std::string why;
  const Verdict v = ask_verdict("exclusion", values, &why);
  trace_.events.push_back({"exclusion_critic", z, to_string(v), why});
  if (rationale) *rationale = why;
  return v;
}

Verdict AgentRunner::critique_independence(const std::string& z, const std::vector<std::string>& confounders,
                                           const CausalQuery& q, std::string* rationale) {
  if (detail::trim(z).empty()) throw Error(ErrorCode::Domain, "candidate instrument text is empty");
  if (confounders.empty()) throw Error(ErrorCode::Domain, "independence critique needs at least one confounder");
  auto values = query_values(q);
  values["Z"] = z;
  values["U"] = detail::join(confounders, ", ");
  std::string why;
  const Verdict v = ask_verdict("independence", values, &why);
  trace_.events.push_back({"independence_critic", z, to_string(v), why});
  if (rationale) *rationale = why;
  return v;
}

void AgentRunner::critique(CandidateInstrument& c, const std::vector<std::string>& confounders, const CausalQuery& q) {
  c.exclusion = critique_exclusion(c.text, q, &c.exclusion_rationale);
  c.independence = critique_independence(c.text, confounders, q, &c.independence_rationale);
}

std::vector<PairCandidate> AgentRunner::human_proxy_select(const std::vector<PairCandidate>& pairs,
                                                           const std::vector<VariableMeta>& vocab) {
  if (pairs.empty()) throw Error(ErrorCode::Domain, "human proxy needs at least one pair");
  std::vector<PairCandidate> kept;
  for (const auto& p : pairs) {
    const VariableMeta* ma = find_meta(vocab, p.a);
    const VariableMeta* mb = find_meta(vocab, p.b);
    const std::string descriptions = (ma ? describe(*ma) : p.a) + "; " + (mb ? describe(*mb) : p.b);
    bool keep = false;
    std::string why;
    ask(templates_.render("human_proxy", {{"Pair", "(" + p.a + ", " + p.b + ")"}, {"Descriptions", descriptions}}),
        [&](const AnswerParts& parts) { keep = parse_keep(parts.body); }, &why);
    trace_.events.push_back({"human_proxy", p.a + " ~ " + p.b, keep ? "keep" : "drop", why});
    if (keep) kept.push_back(p);
  }
  return kept;
}

DirectionJudgment AgentRunner::causal_direction(const PairCandidate& pair) {
  if (pair.a.empty() || pair.b.empty() || pair.a == pair.b) throw Error(ErrorCode::Domain, "invalid variable pair");
  DirectionJudgment j;
  const int choice = ask_choice("causal_direction", {{"A", pair.a}, {"B", pair.b}}, 1, 4, &j.rationale);
  j.verdict = static_cast<Direction>(choice - 1);
  trace_.events.push_back({"causal_oracle", pair.a + " ~ " + pair.b, to_string(j.verdict), j.rationale});
  return j;
}

const std::vector<double>& AgentRunner::embedding(const std::string& text) {
  auto it = embedding_cache_.find(text);
  if (it == embedding_cache_.end()) it = embedding_cache_.emplace(text, provider_.embed(text)).first;
  return it->second;
}

std::vector<const VariableMeta*> AgentRunner::shortlist(const std::string& z, const std::vector<VariableMeta>& vocab) {
  std::vector<std::pair<double, const VariableMeta*>> scored;
  std::size_t cap;
  if (provider_.can_embed()) {
    const auto& ez = embedding(z);
    for (const auto& m : vocab) scored.emplace_back(cosine_similarity(ez, embedding(describe(m))), &m);
    cap = settings_.shortlist;
  } else {
    const auto zt = detail::word_tokens(z);
    const std::set<std::string> ztokens(zt.begin(), zt.end());
    for (const auto& m : vocab) {
      std::set<std::string> seen;
      double overlap = 0.0;
      for (const auto& t : detail::word_tokens(m.name + " " + m.description)) {
        if (ztokens.contains(t) && seen.insert(t).second) overlap += 1.0;
      }
      scored.emplace_back(overlap, &m);
    }
    cap = settings_.lexical_cap;
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& l, const auto& r) {
    if (l.first != r.first) return l.first > r.first;
    return l.second->name < r.second->name;
  });
  std::vector<const VariableMeta*> out;
  for (std::size_t k = 0; k < scored.size() && k < std::max<std::size_t>(cap, 1); ++k) out.push_back(scored[k].second);
  return out;
}

std::optional<std::string> AgentRunner::ground_instrument(const std::string& z, const std::vector<VariableMeta>& vocab) {
  if (vocab.empty()) throw Error(ErrorCode::Domain, "grounding needs a nonempty variable vocabulary");
  const std::string wanted = detail::normalize_words(z);
  for (const auto& m : vocab) {
    if (wanted == detail::normalize_words(m.name) ||
        (!m.description.empty() && wanted == detail::normalize_words(m.description))) {
      trace_.events.push_back({"grounder", z, m.name, "identical wording"});
      return m.name;
    }
  }

  const auto candidates = shortlist(z, vocab);
  std::string listing;
  for (const auto* m : candidates) listing += "- " + describe(*m) + "\n";
  if (!listing.empty()) listing.pop_back();

  std::optional<std::string> picked;
  std::string why;
  ask(templates_.render("grounder", {{"Z", z}, {"Candidates", listing}}),
      [&](const AnswerParts& parts) {
        const std::string answer = detail::normalize_words(parts.body);
        if (answer == "none") {
          picked.reset();
          return;
        }
        for (const auto* m : candidates) {
          if (answer == detail::normalize_words(m->name)) {
            picked = m->name;
            return;
          }
        }
        throw ParseError("'" + parts.body + "' is not one of the listed variables", parts.body);
      },
      &why);
  trace_.events.push_back({"grounder", z, picked.value_or("none"), why});
  return picked;
}

std::vector<CandidateInstrument> filter_valid(const std::vector<CandidateInstrument>& candidates) {
  std::vector<CandidateInstrument> out;
  for (const auto& c : candidates) {
    if (c.exclusion == Verdict::Unevaluated || c.independence == Verdict::Unevaluated) {
      throw Error(ErrorCode::State, "candidate '" + c.text + "' has not been critiqued by both agents");
    }
    if (c.passes()) out.push_back(c);
  }
  return out;
}

std::vector<CandidateInstrument> inject_flawed(std::vector<CandidateInstrument> candidates, const std::string& z_minus,
                                               std::uint64_t seed) {
  if (detail::trim(z_minus).empty()) throw Error(ErrorCode::Domain, "flawed instrument text is empty");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> position(0, candidates.size());
  CandidateInstrument injected;
  injected.text = z_minus;
  injected.provenance = Provenance::Injected;
  candidates.insert(candidates.begin() + static_cast<std::ptrdiff_t>(position(rng)), std::move(injected));
  return candidates;
}

}  // namespace ivlab
