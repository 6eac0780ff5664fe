#include <gtest/gtest.h>

#include <cstdint>
#include <string>
#include <vector>

#include "kmatch/exact_matching.hpp"
#include "kmatch/harness.hpp"
#include "kmatch/seed.hpp"
#include "kmatch/stream.hpp"

namespace {

using kmatch::Edge;
using kmatch::ParseError;
using kmatch::RecordKind;
using kmatch::StreamModel;

std::size_t error_line(const std::string& text, StreamModel model = StreamModel::Dynamic) {
  try {
    (void)kmatch::parse_stream(text, model);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(ParseStream, Basic) {
  const auto s = kmatch::parse_stream("H 4 1 0\nI 0 1 5\nQ\n");
  EXPECT_EQ(s.n, 4U);
  EXPECT_EQ(s.k, 1U);
  ASSERT_EQ(s.records.size(), 2U);
  EXPECT_EQ(s.records[0].kind, RecordKind::Insert);
  EXPECT_EQ(s.records[0].edge, (Edge{0, 1, 5}));
  EXPECT_EQ(s.records[1].kind, RecordKind::Query);
}

TEST(ParseStream, NormalizesAndScales) {
  EXPECT_EQ(kmatch::parse_stream("H 4 1 0\nI 1 0 5\nQ\n").records[0].edge, (Edge{0, 1, 5}));
  EXPECT_EQ(kmatch::parse_stream("H 4 1 2\nI 2 3 1.25\nQ\n").records[0].edge, (Edge{2, 3, 125}));
  EXPECT_EQ(kmatch::parse_stream("H 4 1 2\nI 2 3 7\nQ\n").records[0].edge.w, 700);
  EXPECT_EQ(kmatch::parse_stream("H 4 1 3\nI 2 3 0.5\nQ\n").records[0].edge.w, 500);
  // comments and blank lines
  EXPECT_EQ(kmatch::parse_stream("# hi\n\nH 4 1 0\n  I 0 1 5  \n\nQ").records.size(), 2U);
}

TEST(ParseStream, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("H 4 1 0\nI 0 4 5\nQ\n"), 2U);
  EXPECT_EQ(error_line("H 4 1 0\nI 0 1\nQ\n"), 2U);
  EXPECT_EQ(error_line("H 4 1 0\nQ\nX 1 2\n"), 3U);
  EXPECT_EQ(error_line("H 4 1 0\nI 2 2 1\nQ\n"), 2U);
  EXPECT_EQ(error_line("H 4 1 0\nI 0 1 -3\nQ\n"), 2U);
  EXPECT_EQ(error_line("H 4 1 1\nI 0 1 1.25\nQ\n"), 2U);
  EXPECT_EQ(error_line("H 4 1 0\nI 0 1 1.\nQ\n"), 2U);
  EXPECT_EQ(error_line("I 0 1 5\nQ\n"), 1U);
  EXPECT_EQ(error_line("H 4 0 0\nQ\n"), 1U);
  EXPECT_EQ(error_line("H 4 1 19\nQ\n"), 1U);
  EXPECT_EQ(error_line("H 4 1 0\nQ\nH 4 1 0\n"), 3U);
  EXPECT_EQ(error_line("H 4 1 0\nI 0 1 5\nD 0 1 5\n"), 4U);  // no Q: reported past the last line
  EXPECT_EQ(error_line("H 4 1 0\nI 0 1 5\nD 0 1 5\nQ\n", StreamModel::InsertOnly), 3U);
  EXPECT_EQ(error_line("H 4 1 0\nI 0 1 99999999999999999999\nQ\n"), 2U);
  EXPECT_EQ(error_line("H 4 1 0\nI 0 1 5\nD 0 1 5\nQ\n"), 0U);
}

TEST(ParseStream, RoundTrip) {
  kmatch::Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    kmatch::StreamFile f;
    f.n = std::uniform_int_distribution<std::uint64_t>(2, 500)(rng);
    f.k = std::uniform_int_distribution<std::uint64_t>(1, 9)(rng);
    f.precision = std::uniform_int_distribution<unsigned>(0, 6)(rng);
    std::uniform_int_distribution<kmatch::Vertex> vx(0, static_cast<kmatch::Vertex>(f.n - 1));
    std::uniform_int_distribution<std::int64_t> wt(0, 1'000'000'000);
    std::uniform_int_distribution<int> kind(0, 2);
    const int len = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int r = 0; r < len; ++r) {
      const int c = kind(rng);
      if (c == 2) {
        f.records.push_back({RecordKind::Query, {}, 0});
        continue;
      }
      kmatch::Vertex a = vx(rng), b = vx(rng);
      if (a == b) continue;
      f.records.push_back({c == 0 ? RecordKind::Insert : RecordKind::Delete, kmatch::make_edge(a, b, wt(rng)), 0});
    }
    f.records.push_back({RecordKind::Query, {}, 0});
    const auto text = kmatch::render(f);
    ASSERT_EQ(kmatch::parse_stream(text), f) << text;
    ASSERT_EQ(kmatch::render(kmatch::parse_stream(text)), text);
  }
}

TEST(WellFormed, FlagsModelViolations) {
  const auto ok = kmatch::parse_stream("H 5 1 0\nI 0 1 5\nD 0 1 5\nI 0 1 5\nQ\n");
  EXPECT_TRUE(kmatch::check_well_formed(ok).empty());
  const auto bad = kmatch::parse_stream("H 5 1 0\nI 0 1 5\nI 0 1 5\nD 2 3 1\nI 3 4 1\nD 3 4 2\nQ\n");
  const auto issues = kmatch::check_well_formed(bad);
  ASSERT_EQ(issues.size(), 3U);
  EXPECT_EQ(issues[0].record, 1U);
  EXPECT_EQ(issues[1].record, 2U);
  EXPECT_EQ(issues[2].record, 4U);
}

TEST(GenPlanted, KnownOptimum) {
  kmatch::PlantedConfig cfg;
  cfg.n = 50;
  cfg.k = 3;
  cfg.palette = 5;
  cfg.planted_weights = {7, 7, 9};
  cfg.noise_max = 5;
  cfg.m = 120;
  cfg.del_rate = 0.4;
  for (std::uint64_t s = 0; s < 30; ++s) {
    cfg.seed = s;
    const auto inst = kmatch::gen_planted(cfg);
    ASSERT_EQ(inst.opt, 23);
    const auto solved = kmatch::solve_exact(inst.final_edges, 3);
    ASSERT_TRUE(solved);
    EXPECT_EQ(solved->weight, 23);
    EXPECT_TRUE(kmatch::check_well_formed(inst.stream).empty());
    EXPECT_EQ(inst.stream.records.back().kind, RecordKind::Query);
  }
}

TEST(GenPlanted, OptMatchesSolverOnDefaults) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    kmatch::PlantedConfig cfg;
    cfg.n = 30;
    cfg.k = 1 + s % 4;
    cfg.m = 80;
    cfg.del_rate = 0.5;
    cfg.seed = s;
    const auto inst = kmatch::gen_planted(cfg);
    const auto solved = kmatch::solve_exact(inst.final_edges, cfg.k);
    ASSERT_TRUE(solved && inst.opt);
    EXPECT_EQ(solved->weight, *inst.opt);
    kmatch::LiveGraph g;
    for (const auto& r : inst.stream.records) {
      if (r.kind == RecordKind::Insert) g.insert(r.edge);
      if (r.kind == RecordKind::Delete) g.erase(r.edge);
    }
    auto final_edges = inst.final_edges;
    std::sort(final_edges.begin(), final_edges.end(), kmatch::beta_greater<std::int64_t>);
    auto live = g.edges();
    std::sort(live.begin(), live.end(), kmatch::beta_greater<std::int64_t>);
    EXPECT_EQ(live, final_edges);
  }
}

TEST(GenPlanted, NoDeletionsKeepsEverything) {
  kmatch::PlantedConfig cfg;
  cfg.n = 40;
  cfg.k = 2;
  cfg.m = 100;
  cfg.seed = 5;
  const auto inst = kmatch::gen_planted(cfg);
  std::size_t inserts = 0;
  for (const auto& r : inst.stream.records) {
    EXPECT_NE(r.kind, RecordKind::Delete);
    inserts += r.kind == RecordKind::Insert ? 1 : 0;
  }
  EXPECT_EQ(inserts, inst.final_edges.size());
  EXPECT_EQ(inserts, 100U);
}

TEST(GenPlanted, RejectsBadParameters) {
  kmatch::PlantedConfig cfg;
  cfg.k = 0;
  EXPECT_THROW(kmatch::gen_planted(cfg), kmatch::ParameterError);
  cfg.k = 26;
  cfg.n = 50;
  EXPECT_THROW(kmatch::gen_planted(cfg), kmatch::ParameterError);
  cfg.k = 2;
  cfg.palette = 0;
  EXPECT_THROW(kmatch::gen_planted(cfg), kmatch::ParameterError);
  cfg.palette = 5;
  cfg.model = StreamModel::InsertOnly;
  cfg.del_rate = 0.5;
  EXPECT_THROW(kmatch::gen_planted(cfg), kmatch::ParameterError);
}

TEST(GenPlanted, NoMatchingMode) {
  kmatch::PlantedConfig cfg;
  cfg.n = 30;
  cfg.k = 3;
  cfg.m = 120;
  cfg.del_rate = 0.3;
  cfg.no_k_matching = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    cfg.seed = s;
    const auto inst = kmatch::gen_planted(cfg);
    EXPECT_FALSE(inst.opt.has_value());
    EXPECT_FALSE(kmatch::solve_exact(inst.final_edges, 3).has_value());
  }
}

TEST(RunTrials, ReproducibleAndThreadIndependent) {
  kmatch::TrialConfig cfg;
  cfg.gen.n = 30;
  cfg.gen.k = 2;
  cfg.gen.m = 80;
  cfg.gen.del_rate = 0.5;
  const auto a = kmatch::run_trials(cfg, 12, 77);
  const auto b = kmatch::run_trials(cfg, 12, 77);
  cfg.threads = 3;
  const auto c = kmatch::run_trials(cfg, 12, 77);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a.trials, 12U);
  EXPECT_LE(a.successes, a.trials);
  EXPECT_LE(a.successes, a.answered);
  EXPECT_EQ(a.one_sided_violations, 0U);
  EXPECT_TRUE(a.bank_bound_ok);
  EXPECT_TRUE(a.touch_count_ok);
}

TEST(RunTrials, NoMatchingStreamsHaveNoViolations) {
  for (auto model : {kmatch::Model::Dynamic, kmatch::Model::DynamicApprox, kmatch::Model::Insert}) {
    kmatch::TrialConfig cfg;
    cfg.model = model;
    cfg.gen.n = 30;
    cfg.gen.k = 3;
    cfg.gen.m = 100;
    cfg.gen.no_k_matching = true;
    if (model == kmatch::Model::Insert) cfg.gen.model = StreamModel::InsertOnly;
    else cfg.gen.del_rate = 0.3;
    const auto r = kmatch::run_trials(cfg, 10, 3);
    EXPECT_EQ(r.with_k_matching, 0U);
    EXPECT_EQ(r.successes, 0U);
    EXPECT_EQ(r.answered, 0U);
    EXPECT_EQ(r.one_sided_violations, 0U);
  }
}

TEST(Replay, AnswersEveryQuery) {
  const auto s = kmatch::parse_stream("H 6 2 0\nQ\nI 0 1 3\nI 2 3 4\nQ\nD 2 3 4\nQ\nI 4 5 1\nQ\n");
  for (auto model : {kmatch::Model::Dynamic, kmatch::Model::DynamicApprox}) {
    kmatch::Rng rng(23);
    const auto res = kmatch::replay_stream(s, {model, 0.1, 0.5}, rng);
    ASSERT_EQ(res.answers.size(), 4U);
    EXPECT_FALSE(res.answers[0].matching);
    EXPECT_FALSE(res.answers[2].matching);
    for (const auto& a : res.answers) EXPECT_TRUE(a.one_sided_ok);
  }
  kmatch::Rng rng(24);
  const auto ins = kmatch::parse_stream("H 6 2 0\nQ\nI 0 1 3\nI 2 3 4\nQ\nI 4 5 1\nQ\n", StreamModel::InsertOnly);
  const auto res = kmatch::replay_stream(ins, {kmatch::Model::Insert, 0.1, 0.5}, rng);
  ASSERT_EQ(res.answers.size(), 3U);
  EXPECT_FALSE(res.answers[0].matching);
  ASSERT_TRUE(res.answers[1].matching);
  EXPECT_EQ(res.answers[1].matching->weight, 7);
  EXPECT_EQ(res.answers[2].matching->weight, 7);
}

TEST(Seeds, DerivationSeparatesStreams) {
  EXPECT_EQ(kmatch::derive_seed(1, {2, 3}), kmatch::derive_seed(1, {2, 3}));
  EXPECT_NE(kmatch::derive_seed(1, {2, 3}), kmatch::derive_seed(1, {3, 2}));
  EXPECT_NE(kmatch::derive_seed(1, {2}), kmatch::derive_seed(2, {2}));
  EXPECT_NE(kmatch::derive_seed(1, {kmatch::kTagGenerate}), kmatch::derive_seed(1, {kmatch::kTagAlgorithm}));
}

TEST(Profile, InsertOnlyOpsFlat) {
  const auto a = kmatch::profile_insert(1000, 2, 0.25, 1000, 9);
  const auto b = kmatch::profile_insert(1000, 2, 0.25, 10000, 9);
  EXPECT_EQ(a.copies, 2U);
  EXPECT_LE(static_cast<double>(b.max_ops), 1.1 * static_cast<double>(a.max_ops));
  EXPECT_LE(b.max_ops, a.copies * (a.budget + 3));
  EXPECT_EQ(a.updates, 1000U);
  EXPECT_LE(b.peak_edges_per_copy, b.edge_bound);
}

}  // namespace
