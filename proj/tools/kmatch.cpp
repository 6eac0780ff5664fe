// kmatch: run, generate, verify and benchmark k-matching streams.
//
// Exit codes: 0 success, 2 unreadable or ill-formed stream, 3 an answer that
// is not a k-matching of the live graph.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kmatch/kmatch.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitViolation = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kmatch::ParseError(0, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

kmatch::Model parse_model(const std::string& s) {
  if (s == "dynamic") return kmatch::Model::Dynamic;
  if (s == "dynamic-approx") return kmatch::Model::DynamicApprox;
  return kmatch::Model::Insert;
}

void print_matching(std::ostream& os, const kmatch::Matching& m, unsigned precision) {
  os << "weight " << kmatch::format_weight(m.weight, precision);
  for (const auto& e : m.edges) os << ' ' << e.u << '-' << e.v << ':' << kmatch::format_weight(e.w, precision);
}

struct RunArgs {
  std::string model = "dynamic";
  std::uint64_t k = 0;
  double epsilon = 0.1;
  double delta = 0.5;
  std::uint64_t seed = 1;
  bool stats = false;
  std::string file;
};

int cmd_run(const RunArgs& a) {
  const auto model = parse_model(a.model);
  const auto stream_model = model == kmatch::Model::Insert ? kmatch::StreamModel::InsertOnly
                                                           : kmatch::StreamModel::Dynamic;
  kmatch::StreamFile s = kmatch::parse_stream(read_file(a.file), stream_model);
  if (a.k != 0) s.k = a.k;
  kmatch::Rng rng = kmatch::make_rng(a.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = kmatch::replay_stream(s, {model, a.epsilon, a.delta}, rng);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  bool violation = false;
  for (std::size_t q = 0; q < res.answers.size(); ++q) {
    const auto& ans = res.answers[q];
    std::cout << "Q" << q << " (line " << s.records[ans.record].line << "): ";
    if (!ans.matching) {
      std::cout << "none\n";
      continue;
    }
    print_matching(std::cout, *ans.matching, s.precision);
    if (model == kmatch::Model::DynamicApprox) std::cout << " (rounded " << ans.reported_weight << ')';
    if (!ans.one_sided_ok) {
      std::cout << " INVALID";
      violation = true;
    }
    std::cout << '\n';
  }
  if (a.stats) {
    std::cerr << "model " << kmatch::model_name(model) << "  records " << s.records.size() << "  seconds " << secs
              << "\npeak stored words " << res.peak_stored_words << "  max update ops " << res.max_update_ops << '\n';
    if (model != kmatch::Model::Insert) {
      std::cerr << "max samplers " << res.max_bank_size << "  weight classes " << res.distinct_classes
                << "  sampler queries " << res.sampler_queries << "  failed " << res.sampler_fails << '\n';
    }
  }
  return violation ? kExitViolation : 0;
}

int cmd_gen(const kmatch::PlantedConfig& cfg, bool insert_model) {
  kmatch::PlantedConfig c = cfg;
  c.model = insert_model ? kmatch::StreamModel::InsertOnly : kmatch::StreamModel::Dynamic;
  const auto inst = kmatch::gen_planted(c);
  std::cout << "# planted n=" << c.n << " k=" << c.k << " W=" << c.palette << " seed=" << c.seed << '\n';
  std::cout << "# opt " << (inst.opt ? std::to_string(*inst.opt) : std::string("none")) << '\n';
  std::cout << kmatch::render(inst.stream);
  return 0;
}

int cmd_verify(const std::string& path) {
  const kmatch::StreamFile s = kmatch::parse_stream(read_file(path));
  const auto issues = kmatch::check_well_formed(s);
  for (const auto& is : issues) std::cout << "line " << s.records[is.record].line << ": " << is.what << '\n';

  kmatch::LiveGraph live;
  std::size_t q = 0;
  for (const auto& r : s.records) {
    if (r.kind == kmatch::RecordKind::Insert) live.insert(r.edge);
    if (r.kind == kmatch::RecordKind::Delete) live.erase(r.edge);
    if (r.kind != kmatch::RecordKind::Query) continue;
    const auto edges = live.edges();
    const auto best = kmatch::solve_exact(edges, s.k);
    std::cout << "Q" << q++ << " (line " << r.line << "): ";
    if (best) {
      print_matching(std::cout, *best, s.precision);
    } else {
      std::cout << "none";
    }
    std::cout << '\n';
  }
  std::cout << (issues.empty() ? "well-formed" : "ill-formed") << '\n';
  return issues.empty() ? 0 : kExitParse;
}

struct BenchArgs {
  std::string model = "insert";
  std::uint64_t n = 1000;
  std::uint64_t k = 2;
  double delta = 0.5;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> lengths{1000, 10000, 100000};
};

int cmd_bench(const BenchArgs& a) {
  const auto model = parse_model(a.model);
  for (const auto m : a.lengths) {
    const auto t0 = std::chrono::steady_clock::now();
    if (model == kmatch::Model::Insert) {
      const auto prof = kmatch::profile_insert(a.n, a.k, a.delta, m, a.seed);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "m=" << m << " copies=" << prof.copies << " budget=" << prof.budget
                << " max_ops=" << prof.max_ops << " mean_ops=" << static_cast<double>(prof.total_ops) / m
                << " peak_edges_per_copy=" << prof.peak_edges_per_copy << " (bound " << prof.edge_bound << ")"
                << " peak_words=" << prof.peak_stored_words << " seconds=" << secs << '\n';
    } else {
      kmatch::PlantedConfig g;
      g.n = a.n;
      g.k = a.k;
      g.m = m;
      g.del_rate = 0.5;
      g.seed = a.seed;
      const auto inst = kmatch::gen_planted(g);
      kmatch::Rng rng = kmatch::make_rng(a.seed, {kmatch::kTagAlgorithm});
      const auto res = kmatch::replay_stream(inst.stream, {model, 0.1, a.delta}, rng);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "m=" << m << " max_cell_writes=" << res.max_update_ops << " max_samplers=" << res.max_bank_size
                << " touch_ok=" << res.touch_count_ok << " bank_bound_ok=" << res.bank_bound_ok
                << " peak_words=" << res.peak_stored_words << " seconds=" << secs << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming maximum-weight k-matching"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Replay a stream and print the answer at every Q record");
  run_cmd->add_option("--model", run.model)->check(CLI::IsMember({"dynamic", "dynamic-approx", "insert"}));
  run_cmd->add_option("--k", run.k, "override the header's k");
  run_cmd->add_option("--epsilon", run.epsilon, "rounding for dynamic-approx")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--delta", run.delta, "failure target for insert")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--seed", run.seed);
  run_cmd->add_flag("--stats", run.stats, "print space and time figures to stderr");
  run_cmd->add_option("file", run.file)->required();

  kmatch::PlantedConfig gen;
  std::string gen_model = "dynamic";
  bool gen_none = false;
  auto* gen_cmd = app.add_subcommand("gen", "Write a planted stream to stdout");
  gen_cmd->add_option("--n", gen.n);
  gen_cmd->add_option("--k", gen.k);
  gen_cmd->add_option("--weights", gen.palette, "palette size W");
  gen_cmd->add_option("--m", gen.m, "number of updates");
  gen_cmd->add_option("--del-rate", gen.del_rate)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--model", gen_model)->check(CLI::IsMember({"dynamic", "insert"}));
  gen_cmd->add_flag("--no-matching", gen_none, "final graph has no k-matching");

  std::string verify_file;
  auto* verify_cmd = app.add_subcommand("verify", "Check stream well-formedness and print exact answers");
  verify_cmd->add_option("file", verify_file)->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Per-update cost over several stream lengths");
  bench_cmd->add_option("--model", bench.model)->check(CLI::IsMember({"dynamic", "dynamic-approx", "insert"}));
  bench_cmd->add_option("--n", bench.n);
  bench_cmd->add_option("--k", bench.k);
  bench_cmd->add_option("--delta", bench.delta);
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--lengths", bench.lengths)->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*gen_cmd) {
      gen.no_k_matching = gen_none;
      return cmd_gen(gen, gen_model == "insert");
    }
    if (*verify_cmd) return cmd_verify(verify_file);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const kmatch::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const kmatch::ModelError& e) {
    std::cerr << "stream error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
