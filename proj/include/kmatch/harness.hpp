#ifndef KMATCH_HARNESS_HPP
#define KMATCH_HARNESS_HPP

// Planted-instance generation, stream replay with answer checking, seeded
// Monte-Carlo trials and per-update cost profiles.
//
// Seed tags: a trial t of run_trials(seed) generates its instance from
// derive_seed(seed, {kTagGenerate, t}) and draws algorithm randomness from
// derive_seed(seed, {kTagAlgorithm, t}).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dynamic_matcher.hpp"
#include "errors.hpp"
#include "exact_matching.hpp"
#include "graph.hpp"
#include "insert_matcher.hpp"
#include "seed.hpp"
#include "stream.hpp"

namespace kmatch {

inline constexpr std::uint64_t kTagGenerate = 1;
inline constexpr std::uint64_t kTagAlgorithm = 2;

struct PlantedConfig {
  std::uint64_t n = 50;
  std::uint64_t k = 2;
  std::int64_t palette = 5;  ///< W: weights are drawn from {1, ..., W}
  std::uint64_t m = 300;     ///< total updates (insertions plus deletions)
  double del_rate = 0.0;     ///< deletions per insertion; deleted edges never survive
  std::uint64_t seed = 0;
  StreamModel model = StreamModel::Dynamic;
  /// No planted matching; every surviving edge touches one of k-1 hub vertices.
  bool no_k_matching = false;
  /// Planted weights; drawn from the upper half of the palette when empty.
  std::vector<std::int64_t> planted_weights;
  /// Largest surviving noise weight; defaults to the smallest planted weight.
  std::optional<std::int64_t> noise_max;
};

struct PlantedInstance {
  StreamFile stream;
  std::vector<Edge> planted;
  std::vector<Edge> final_edges;
  /// Weight of a maximum-weight k-matching of the final graph; empty when none exists.
  std::optional<std::int64_t> opt;
};

namespace detail {

inline std::uint64_t pair_key(Vertex u, Vertex v) { return (static_cast<std::uint64_t>(u) << 32) | v; }

}  // namespace detail

/// Builds a stream whose final graph is a planted k-matching plus lighter noise
/// (or, with no_k_matching, a graph of matching number k-1). Edges that are
/// deleted may carry any palette weight. Every pair is inserted at most once.
///
/// OPT of the final graph equals the planted total: in any k-matching, each
/// noise edge can be traded for an unused planted edge that is at least as
/// heavy. Small final graphs are also checked by enumeration.
inline PlantedInstance gen_planted(const PlantedConfig& cfg) {
  if (cfg.k < 1 || cfg.n < 2 || cfg.k > cfg.n / 2) throw ParameterError("planted instance needs 1 <= k <= n/2");
  if (cfg.palette < 1) throw ParameterError("weight palette must be non-empty");
  if (!(cfg.del_rate >= 0.0 && cfg.del_rate <= 1.0)) throw ParameterError("deletion rate must lie in [0, 1]");
  if (cfg.model == StreamModel::InsertOnly && cfg.del_rate > 0.0) {
    throw ParameterError("insert-only streams cannot delete");
  }
  if (!cfg.planted_weights.empty() && cfg.planted_weights.size() != cfg.k) {
    throw ParameterError("need exactly k planted weights");
  }

  Rng rng = make_rng(cfg.seed, {kTagGenerate});
  std::vector<Vertex> perm(cfg.n);
  std::iota(perm.begin(), perm.end(), Vertex{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  PlantedInstance inst;
  std::unordered_set<std::uint64_t> used;
  std::vector<Edge> inserts;

  std::int64_t noise_cap = cfg.palette;
  const std::uint64_t hubs = cfg.no_k_matching ? cfg.k - 1 : 0;
  if (!cfg.no_k_matching) {
    std::vector<std::int64_t> weights = cfg.planted_weights;
    if (weights.empty()) {
      std::uniform_int_distribution<std::int64_t> top((cfg.palette + 2) / 2, cfg.palette);
      for (std::uint64_t t = 0; t < cfg.k; ++t) weights.push_back(top(rng));
    }
    const std::int64_t lightest = *std::min_element(weights.begin(), weights.end());
    noise_cap = cfg.noise_max.value_or(lightest);
    if (noise_cap > lightest) throw ParameterError("noise may not outweigh a planted edge");
    for (std::uint64_t t = 0; t < cfg.k; ++t) {
      const Edge e = make_edge(perm[2 * t], perm[2 * t + 1], weights[t]);
      inst.planted.push_back(e);
      used.insert(detail::pair_key(e.u, e.v));
      inserts.push_back(e);
    }
  } else if (cfg.noise_max) {
    noise_cap = *cfg.noise_max;
  }
  if (noise_cap < 1) throw ParameterError("noise weights need a positive cap");

  const std::uint64_t planted = inst.planted.size();
  auto n_ins = static_cast<std::uint64_t>(std::ceil(static_cast<double>(cfg.m) / (1.0 + cfg.del_rate)));
  n_ins = std::max(n_ins, planted);
  std::uint64_t n_del = std::min(cfg.m - std::min(cfg.m, n_ins), n_ins - planted);
  std::uint64_t n_keep = n_ins - planted - n_del;

  const std::uint64_t all_pairs = cfg.n * (cfg.n - 1) / 2;
  if (cfg.no_k_matching) {
    // Surviving edges must touch a hub; spend the rest of the budget on deleted edges.
    const std::uint64_t hub_pairs = hubs * (cfg.n - hubs) + hubs * (hubs - 1) / 2;
    n_keep = std::min(n_keep, hub_pairs);
    if (cfg.model == StreamModel::InsertOnly) {
      n_del = 0;
    } else {
      n_del = (cfg.m - std::min(cfg.m, n_keep)) / 2;
    }
  }
  if (planted + n_keep + n_del > all_pairs) throw ParameterError("more edges requested than vertex pairs");

  std::uniform_int_distribution<std::size_t> pick_vertex(0, cfg.n - 1);
  auto fresh_pair = [&](bool hub_only) {
    while (true) {
      Vertex a = perm[hub_only ? std::uniform_int_distribution<std::size_t>(0, hubs - 1)(rng) : pick_vertex(rng)];
      Vertex b = perm[pick_vertex(rng)];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (used.insert(detail::pair_key(a, b)).second) return std::make_pair(a, b);
    }
  };

  std::uniform_int_distribution<std::int64_t> keep_weight(1, noise_cap);
  std::uniform_int_distribution<std::int64_t> any_weight(1, cfg.palette);
  for (std::uint64_t t = 0; t < n_keep; ++t) {
    const auto [a, b] = fresh_pair(cfg.no_k_matching);
    inserts.push_back({a, b, keep_weight(rng)});
  }
  std::vector<Edge> doomed;
  for (std::uint64_t t = 0; t < n_del; ++t) {
    const auto [a, b] = fresh_pair(false);
    doomed.push_back({a, b, any_weight(rng)});
  }

  // Random event times; a deleted edge's deletion follows its insertion.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, StreamRecord>> events;
  for (const auto& e : inserts) events.push_back({unit(rng), {RecordKind::Insert, e, 0}});
  for (const auto& e : doomed) {
    const double t0 = unit(rng);
    const double t1 = t0 + (1.0 - t0) * unit(rng);
    events.push_back({t0, {RecordKind::Insert, e, 0}});
    events.push_back({std::nextafter(t1, 2.0), {RecordKind::Delete, e, 0}});
  }
  std::stable_sort(events.begin(), events.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  inst.stream.n = cfg.n;
  inst.stream.k = cfg.k;
  inst.stream.precision = 0;
  for (const auto& [t, r] : events) inst.stream.records.push_back(r);
  inst.stream.records.push_back({RecordKind::Query, {}, 0});
  inst.final_edges = inserts;

  if (!cfg.no_k_matching) {
    std::int64_t total = 0;
    for (const auto& e : inst.planted) total += e.w;
    inst.opt = total;
    if (inst.final_edges.size() <= 20) {
      const auto check = enumerate_oracle(inst.final_edges, cfg.k);
      if (!check || check->weight != total) throw std::logic_error("planted optimum disagrees with enumeration");
    }
  }
  return inst;
}

enum class Model { Dynamic, DynamicApprox, Insert };

inline const char* model_name(Model m) {
  switch (m) {
    case Model::Dynamic:
      return "dynamic";
    case Model::DynamicApprox:
      return "dynamic-approx";
    case Model::Insert:
      return "insert";
  }
  return "?";
}

struct ReplayConfig {
  Model model = Model::Dynamic;
  double epsilon = 0.1;  ///< rounding for DynamicApprox
  double delta = 0.5;    ///< failure target for Insert (sets the copy count)
};

/// One answer, with edges re-weighted by their true weights in the live graph.
struct CheckedAnswer {
  std::size_t record = 0;
  std::optional<Matching> matching;  ///< true weights
  double reported_weight = 0.0;      ///< weight as the algorithm reported it
  bool one_sided_ok = true;
};

struct ReplayResult {
  std::vector<CheckedAnswer> answers;
  std::uint64_t max_bank_size = 0;
  std::uint64_t distinct_classes = 0;
  std::uint64_t max_update_ops = 0;
  std::uint64_t peak_stored_words = 0;
  std::uint64_t sampler_queries = 0;
  std::uint64_t sampler_fails = 0;
  bool bank_bound_ok = true;
  bool touch_count_ok = true;
};

namespace detail {

template <class W>
CheckedAnswer check_answer(const std::optional<BasicMatching<W>>& ans, const LiveGraph& live, std::size_t k,
                           bool exact_weights) {
  CheckedAnswer out;
  if (!ans) return out;
  std::vector<Edge> truth;
  bool ok = ans->edges.size() == k;
  for (const auto& e : ans->edges) {
    const auto w = live.weight_of(e.u, e.v);
    if (!w) {
      ok = false;
      continue;
    }
    if (exact_weights && static_cast<double>(*w) != static_cast<double>(e.w)) ok = false;
    truth.push_back({e.u, e.v, *w});
  }
  auto m = make_matching(truth);
  ok = ok && is_k_matching(m, k);
  out.matching = std::move(m);
  out.reported_weight = static_cast<double>(ans->weight);
  out.one_sided_ok = ok;
  return out;
}

template <class Matcher>
void replay_dynamic(const StreamFile& s, Matcher& alg, bool exact_weights, ReplayResult& res) {
  LiveGraph live;
  const auto& p = alg.scheme().params();
  for (std::size_t t = 0; t < s.records.size(); ++t) {
    const auto& r = s.records[t];
    if (r.kind == RecordKind::Query) {
      const auto q = alg.query_detailed();
      res.sampler_queries += q.sampled + q.failed + q.empty;
      res.sampler_fails += q.failed;
      auto a = check_answer(q.answer, live, s.k, exact_weights);
      a.record = t;
      res.answers.push_back(std::move(a));
      continue;
    }
    const EdgeUpdate upd{r.edge, r.kind == RecordKind::Insert ? EdgeOp::Insert : EdgeOp::Delete};
    alg.update(upd);
    if (upd.op == EdgeOp::Insert) {
      live.insert(r.edge);
    } else {
      live.erase(r.edge);
    }
    const auto& st = alg.last_update();
    res.touch_count_ok = res.touch_count_ok && st.samplers_touched == p.d2 * p.d2 &&
                         st.cell_writes <= st.samplers_touched * alg.basis().slot_count();
    res.bank_bound_ok = res.bank_bound_ok && alg.bank_size() <= alg.bank_bound();
    res.max_bank_size = std::max<std::uint64_t>(res.max_bank_size, alg.bank_size());
    res.max_update_ops = std::max(res.max_update_ops, st.cell_writes);
    res.peak_stored_words = std::max(res.peak_stored_words, alg.stored_words());
  }
  res.distinct_classes = alg.distinct_classes();
}

}  // namespace detail

/// Replays a stream through a fresh algorithm instance and checks every answer
/// against the live graph at its query point.
inline ReplayResult replay_stream(const StreamFile& s, const ReplayConfig& cfg, Rng& rng) {
  ReplayResult res;
  switch (cfg.model) {
    case Model::Dynamic: {
      ExactDynamicMatcher alg(s.n, s.k, ExactWeights{}, rng);
      detail::replay_dynamic(s, alg, true, res);
      break;
    }
    case Model::DynamicApprox: {
      ApproxDynamicMatcher alg(s.n, s.k, RoundedWeights{cfg.epsilon, weight_scale(s.precision)}, rng);
      detail::replay_dynamic(s, alg, false, res);
      break;
    }
    case Model::Insert: {
      InsertMatcher alg(s.n, s.k, cfg.delta, rng);
      LiveGraph live;
      for (std::size_t t = 0; t < s.records.size(); ++t) {
        const auto& r = s.records[t];
        if (r.kind == RecordKind::Query) {
          auto a = detail::check_answer(alg.query(), live, s.k, true);
          a.record = t;
          res.answers.push_back(std::move(a));
          continue;
        }
        if (r.kind == RecordKind::Delete) throw ModelError("deletion in an insert-only stream");
        res.max_update_ops = std::max(res.max_update_ops, alg.update(r.edge));
        live.insert(r.edge);
        res.peak_stored_words = std::max(res.peak_stored_words, alg.stored_words());
      }
      break;
    }
  }
  return res;
}

struct TrialConfig {
  Model model = Model::Dynamic;
  PlantedConfig gen;
  double epsilon = 0.1;
  double delta = 0.5;
  unsigned threads = 1;
};

struct TrialReport {
  std::uint64_t trials = 0;
  std::uint64_t with_k_matching = 0;
  std::uint64_t successes = 0;  ///< final answer weight equals OPT
  std::uint64_t answered = 0;   ///< final answer present (on instances with a k-matching)
  std::uint64_t within_eps = 0; ///< answered with true weight > (1 - eps) OPT
  std::uint64_t one_sided_violations = 0;
  std::uint64_t sampler_queries = 0;
  std::uint64_t sampler_fails = 0;
  std::uint64_t max_bank_size = 0;
  std::uint64_t max_distinct_classes = 0;
  std::uint64_t max_update_ops = 0;
  std::uint64_t peak_stored_words = 0;
  bool bank_bound_ok = true;
  bool touch_count_ok = true;

  friend bool operator==(const TrialReport&, const TrialReport&) = default;
};

/// Seeded trials on fresh planted instances; the result depends only on
/// (config, trials, seed), not on the thread count.
inline TrialReport run_trials(const TrialConfig& cfg, std::uint64_t trials, std::uint64_t seed) {
  struct Outcome {
    bool has_matching = false;
    bool success = false;
    bool answered = false;
    bool within = false;
    std::uint64_t violations = 0;
    ReplayResult replay;
  };
  std::vector<Outcome> out(trials);
  const ReplayConfig rc{cfg.model, cfg.epsilon, cfg.delta};

  auto run_one = [&](std::uint64_t t) {
    PlantedConfig g = cfg.gen;
    g.seed = derive_seed(seed, {kTagGenerate, t});
    if (cfg.model == Model::Insert) g.model = StreamModel::InsertOnly;
    const PlantedInstance inst = gen_planted(g);
    Rng rng = make_rng(seed, {kTagAlgorithm, t});
    Outcome& o = out[t];
    o.replay = replay_stream(inst.stream, rc, rng);
    for (const auto& a : o.replay.answers) o.violations += a.one_sided_ok ? 0 : 1;
    o.has_matching = inst.opt.has_value();
    if (o.has_matching && !o.replay.answers.empty()) {
      const auto& last = o.replay.answers.back();
      if (last.matching && last.one_sided_ok) {
        o.answered = true;
        o.success = last.matching->weight == *inst.opt;
        o.within = static_cast<double>(last.matching->weight) > (1.0 - cfg.epsilon) * static_cast<double>(*inst.opt);
      }
    }
    o.replay.answers.clear();
  };

  const unsigned threads = std::max(1U, std::min<unsigned>(cfg.threads, static_cast<unsigned>(trials)));
  if (threads <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) run_one(t);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t t = next++; t < trials; t = next++) run_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  TrialReport rep;
  rep.trials = trials;
  for (const auto& o : out) {
    rep.with_k_matching += o.has_matching ? 1 : 0;
    rep.successes += o.success ? 1 : 0;
    rep.answered += o.answered ? 1 : 0;
    rep.within_eps += o.within ? 1 : 0;
    rep.one_sided_violations += o.violations;
    rep.sampler_queries += o.replay.sampler_queries;
    rep.sampler_fails += o.replay.sampler_fails;
    rep.max_bank_size = std::max(rep.max_bank_size, o.replay.max_bank_size);
    rep.max_distinct_classes = std::max(rep.max_distinct_classes, o.replay.distinct_classes);
    rep.max_update_ops = std::max(rep.max_update_ops, o.replay.max_update_ops);
    rep.peak_stored_words = std::max(rep.peak_stored_words, o.replay.peak_stored_words);
    rep.bank_bound_ok = rep.bank_bound_ok && o.replay.bank_bound_ok;
    rep.touch_count_ok = rep.touch_count_ok && o.replay.touch_count_ok;
  }
  return rep;
}

/// Insert-only stream of m distinct random pairs on n vertices, weights in {1..W}.
inline std::vector<Edge> random_insert_edges(std::uint64_t n, std::uint64_t m, std::int64_t palette, Rng& rng) {
  if (m > n * (n - 1) / 2) throw ParameterError("more edges requested than vertex pairs");
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 1));
  std::uniform_int_distribution<std::int64_t> weight(1, palette);
  std::unordered_set<std::uint64_t> used;
  std::vector<Edge> out;
  out.reserve(m);
  while (out.size() < m) {
    Vertex a = pick(rng);
    Vertex b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.insert(detail::pair_key(a, b)).second) continue;
    out.push_back({a, b, weight(rng)});
  }
  return out;
}

struct UpdateProfile {
  std::uint64_t updates = 0;
  std::uint64_t max_ops = 0;
  std::uint64_t total_ops = 0;
  std::map<std::uint64_t, std::uint64_t> histogram;  ///< ops -> number of updates
  std::uint64_t peak_edges_per_copy = 0;
  std::uint64_t peak_stored_words = 0;
  std::uint64_t edge_bound = 0;  ///< 5q
  std::uint64_t budget = 0;      ///< per-copy task budget B
  std::size_t copies = 0;
};

/// Per-update unit operations of the insert-only matcher on a random stream.
inline UpdateProfile profile_insert(std::uint64_t n, std::uint64_t k, double delta, std::uint64_t m,
                                    std::uint64_t seed) {
  Rng data = make_rng(seed, {kTagGenerate});
  Rng algo = make_rng(seed, {kTagAlgorithm});
  const auto edges = random_insert_edges(n, m, 5, data);
  InsertMatcher alg(n, k, delta, algo);
  UpdateProfile prof;
  prof.edge_bound = 5 * reduce_quota(k);
  prof.budget = reduce_budget(k);
  prof.copies = alg.copy_count();
  for (const auto& e : edges) {
    const std::uint64_t ops = alg.update(e);
    ++prof.updates;
    prof.total_ops += ops;
    prof.max_ops = std::max(prof.max_ops, ops);
    ++prof.histogram[ops];
    for (std::size_t c = 0; c < alg.copy_count(); ++c) {
      prof.peak_edges_per_copy = std::max(prof.peak_edges_per_copy, alg.copy(c).stored_edges());
    }
    prof.peak_stored_words = std::max(prof.peak_stored_words, alg.stored_words());
  }
  return prof;
}

}  // namespace kmatch

#endif  // KMATCH_HARNESS_HPP
