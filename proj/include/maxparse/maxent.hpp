#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <maxparse/action.hpp>
#include <maxparse/context.hpp>

namespace maxparse {

using Context = std::vector<std::string>;

/// Kahan-compensated accumulator.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

struct Feature {
  std::string predicate;  // predicate key
  Action action;
  double alpha = 1.0;
};

/// Conditional maximum-entropy model over one procedure's action space.
/// p(a | b) is proportional to the product of alpha_j over the features whose
/// predicate is true in b and whose action is a; contexts matching no feature
/// fall back to the uniform distribution.
class MaxentModel {
 public:
  MaxentModel() = default;

  static MaxentModel from_parts(ActionKind procedure, std::vector<Action> actions,
                                std::vector<Feature> features) {
    MaxentModel m;
    m.procedure_ = procedure;
    m.actions_ = std::move(actions);
    std::sort(m.actions_.begin(), m.actions_.end());
    m.actions_.erase(std::unique(m.actions_.begin(), m.actions_.end()), m.actions_.end());
    for (std::size_t i = 0; i < m.actions_.size(); ++i) m.action_index_[encode(m.actions_[i])] = i;

    std::sort(features.begin(), features.end(), [](const Feature& a, const Feature& b) {
      if (a.predicate != b.predicate) return a.predicate < b.predicate;
      return a.action < b.action;
    });
    m.features_ = std::move(features);
    m.lambdas_.reserve(m.features_.size());
    for (std::size_t j = 0; j < m.features_.size(); ++j) {
      const Feature& f = m.features_[j];
      if (!(f.alpha > 0.0)) throw DataError("feature weight must be positive");
      const std::size_t ai = m.index_of(f.action);
      if (ai == npos) throw DataError("feature action missing from vocabulary: " + encode(f.action));
      m.lambdas_.push_back(std::log(f.alpha));
      m.by_predicate_[f.predicate].push_back({static_cast<std::uint32_t>(ai),
                                              static_cast<std::uint32_t>(j)});
    }
    return m;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ActionKind procedure() const { return procedure_; }
  const std::vector<Action>& actions() const { return actions_; }
  const std::vector<Feature>& features() const { return features_; }
  std::size_t n_features() const { return features_.size(); }

  std::size_t index_of(const Action& a) const {
    auto it = action_index_.find(encode(a));
    return it == action_index_.end() ? npos : it->second;
  }

  /// Unnormalized log-scores per action, in actions() order.
  void log_scores(const Context& ctx, std::vector<double>& out) const {
    out.assign(actions_.size(), 0.0);
    for (const auto& key : ctx) {
      auto it = by_predicate_.find(key);
      if (it == by_predicate_.end()) continue;
      for (const auto& [ai, fj] : it->second) out[ai] += lambdas_[fj];
    }
  }

  /// The conditional distribution over the whole action vocabulary.
  std::vector<double> conditionals(const Context& ctx) const {
    std::vector<double> p;
    log_scores(ctx, p);
    normalize_in_place(p);
    return p;
  }

  double conditional(const Action& a, const Context& ctx) const {
    const std::size_t ai = index_of(a);
    if (ai == npos) return 0.0;
    return conditionals(ctx)[ai];
  }

  static void normalize_in_place(std::vector<double>& log_scores) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double s : log_scores) mx = std::max(mx, s);
    KahanSum z;
    for (double& s : log_scores) {
      s = std::exp(s - mx);
      z.add(s);
    }
    for (double& s : log_scores) s /= z.sum;
  }

 private:
  ActionKind procedure_ = ActionKind::Tag;
  std::vector<Action> actions_;
  std::unordered_map<std::string, std::size_t> action_index_;
  std::vector<Feature> features_;
  std::vector<double> lambdas_;
  std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>>
      by_predicate_;
};

struct TrainOptions {
  int cutoff = 5;
  int max_iters = 100;
  double tol = 1e-3;
};

struct TrainStats {
  int iterations = 0;             // number of scaling updates applied
  double final_gap = 0.0;         // max |empirical - model| expectation, per event
  int correction_constant = 0;
  std::size_t feature_count = 0;
  std::vector<double> log_likelihood;  // one entry per evaluation
};

namespace detail {

struct CompiledEvent {
  std::vector<std::uint32_t> preds;  // indices into the predicate key table
  std::uint32_t action = 0;
};

}  // namespace detail

/// Selects (predicate, action) pairs seen at least `cutoff` times.  Weights
/// start at one; gis_train fits them.
inline std::vector<Feature> build_features(const std::vector<Event>& events, int cutoff) {
  std::map<std::string, std::map<std::string, std::pair<Action, int>>> counts;
  for (const auto& e : events) {
    const std::string a = encode(e.action);
    for (const auto& key : e.context) {
      auto& slot = counts[key][a];
      slot.first = e.action;
      ++slot.second;
    }
  }
  std::vector<Feature> features;
  for (const auto& [key, per_action] : counts)
    for (const auto& [a, slot] : per_action)
      if (slot.second >= cutoff) features.push_back({key, slot.first, 1.0});
  if (features.empty())
    throw DataError("degenerate model: no (predicate, action) pair reaches the cutoff");
  return features;
}

/// Generalized Iterative Scaling.  The slack that pads every event's active
/// feature count up to the correction constant is implicit: it is neither
/// stored nor updated, which keeps the log-likelihood ascent monotone with a
/// 1/C step.
inline MaxentModel gis_train(ActionKind procedure, const std::vector<Event>& events,
                             const TrainOptions& opt = {}, TrainStats* stats = nullptr) {
  if (events.empty()) throw DataError("no training events");

  std::vector<Action> vocab;
  for (const auto& e : events) vocab.push_back(e.action);
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

  std::vector<Feature> features = build_features(events, opt.cutoff);

  // Dense tables: predicate index -> [(action, feature)], feature -> lambda.
  std::vector<std::string> pred_keys;
  std::unordered_map<std::string, std::uint32_t> pred_index;
  for (const auto& f : features)
    if (pred_index.emplace(f.predicate, static_cast<std::uint32_t>(pred_keys.size())).second)
      pred_keys.push_back(f.predicate);

  std::unordered_map<std::string, std::uint32_t> action_index;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    action_index[encode(vocab[i])] = static_cast<std::uint32_t>(i);

  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> pred_feats(
      pred_keys.size());
  for (std::size_t j = 0; j < features.size(); ++j)
    pred_feats[pred_index.at(features[j].predicate)].push_back(
        {action_index.at(encode(features[j].action)), static_cast<std::uint32_t>(j)});

  std::vector<detail::CompiledEvent> compiled;
  compiled.reserve(events.size());
  for (const auto& e : events) {
    detail::CompiledEvent ce;
    ce.action = action_index.at(encode(e.action));
    for (const auto& key : e.context) {
      auto it = pred_index.find(key);
      if (it != pred_index.end()) ce.preds.push_back(it->second);
    }
    compiled.push_back(std::move(ce));
  }

  const std::size_t n_actions = vocab.size();
  const std::size_t n_features = features.size();
  const double n_events = static_cast<double>(events.size());

  // Empirical feature counts.
  std::vector<double> empirical(n_features, 0.0);
  for (const auto& ce : compiled)
    for (auto pid : ce.preds)
      for (const auto& [ai, fj] : pred_feats[pid])
        if (ai == ce.action) empirical[fj] += 1.0;

  // Correction constant: the largest active-feature count over every
  // (action, event context) pair the model will ever normalize over.
  int correction = 1;
  {
    std::vector<int> active(n_actions);
    for (const auto& ce : compiled) {
      std::fill(active.begin(), active.end(), 0);
      for (auto pid : ce.preds)
        for (const auto& [ai, fj] : pred_feats[pid]) ++active[ai];
      for (int c : active) correction = std::max(correction, c);
    }
  }

  std::vector<double> lambdas(n_features, 0.0);
  std::vector<double> expected(n_features, 0.0);
  std::vector<double> scores(n_actions);
  std::vector<double> probs(n_actions);

  int updates = 0;
  double gap = std::numeric_limits<double>::infinity();
  std::vector<double> ll_trace;

  while (true) {
    std::fill(expected.begin(), expected.end(), 0.0);
    KahanSum ll;
    for (const auto& ce : compiled) {
      std::fill(scores.begin(), scores.end(), 0.0);
      for (auto pid : ce.preds)
        for (const auto& [ai, fj] : pred_feats[pid]) scores[ai] += lambdas[fj];
      double mx = *std::max_element(scores.begin(), scores.end());
      KahanSum z;
      for (std::size_t a = 0; a < n_actions; ++a) {
        probs[a] = std::exp(scores[a] - mx);
        z.add(probs[a]);
      }
      for (std::size_t a = 0; a < n_actions; ++a) probs[a] /= z.sum;
      ll.add(std::log(std::max(probs[ce.action], 1e-300)));
      for (auto pid : ce.preds)
        for (const auto& [ai, fj] : pred_feats[pid]) expected[fj] += probs[ai];
    }
    ll_trace.push_back(ll.sum);

    gap = 0.0;
    for (std::size_t j = 0; j < n_features; ++j)
      gap = std::max(gap, std::abs(empirical[j] - expected[j]) / n_events);

    if (gap <= opt.tol || updates >= opt.max_iters) break;

    for (std::size_t j = 0; j < n_features; ++j)
      lambdas[j] += std::log(empirical[j] / std::max(expected[j], 1e-300)) /
                    static_cast<double>(correction);
    ++updates;
  }

  for (std::size_t j = 0; j < n_features; ++j) features[j].alpha = std::exp(lambdas[j]);

  if (stats) {
    stats->iterations = updates;
    stats->final_gap = gap;
    stats->correction_constant = correction;
    stats->feature_count = n_features;
    stats->log_likelihood = std::move(ll_trace);
  }
  return MaxentModel::from_parts(procedure, std::move(vocab), std::move(features));
}

/// The four procedure models of one parser.
struct ModelSet {
  MaxentModel tag, chunk, build, check;

  const MaxentModel& for_kind(ActionKind k) const {
    switch (k) {
      case ActionKind::Tag: return tag;
      case ActionKind::Chunk: return chunk;
      case ActionKind::Build: return build;
      default: return check;
    }
  }
};

/// q(a | b): the conditional of whichever model matches the action's
/// procedure.
inline double q_dispatch(const ModelSet& models, const Action& a, const Context& ctx) {
  return models.for_kind(a.kind).conditional(a, ctx);
}

/// Product of per-action conditionals, as a log score.
inline double score_derivation(const ModelSet& models,
                               const std::vector<std::pair<Action, Context>>& steps) {
  double log_score = 0.0;
  for (const auto& [a, ctx] : steps) {
    const double q = q_dispatch(models, a, ctx);
    log_score += std::log(q);
  }
  return log_score;
}

}  // namespace maxparse
