#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bisimdist/bench.hpp"
#include "bisimdist/error.hpp"
#include "bisimdist/modelcheck.hpp"
#include "bisimdist/policy_iter.hpp"
#include "bisimdist/ssg.hpp"
#include "bisimdist/value_iter.hpp"

namespace bisimdist::cli {

namespace {

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

// Writes to `path`, or to `out` when path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write \"" + path + "\"");
  f << text;
}

std::string matrix_csv(const Automaton& a, const DistMatrix& d) {
  std::string s = "state";
  for (const auto& name : a.state_names) s += "," + name;
  s += "\n";
  for (int i = 0; i < a.size(); ++i) {
    s += a.state_names[i];
    for (int j = 0; j < a.size(); ++j) s += "," + shortest(d(i, j));
    s += "\n";
  }
  return s;
}

std::string matrix_json(const Automaton& a, const DistMatrix& d, const nlohmann::ordered_json& trace) {
  nlohmann::ordered_json doc;
  doc["states"] = a.state_names;
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < a.size(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int j = 0; j < a.size(); ++j) row.push_back(d(i, j));
    rows.push_back(row);
  }
  doc["matrix"] = rows;
  doc["trace"] = trace;
  return doc.dump() + "\n";
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto [lo, hi] = parse_range(item);
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

struct DistArgs {
  std::string file;
  double lambda = 1.0;
  double eps = 1e-6;
  std::string method = "spi";
  bool no_precompute = false;
  std::string format = "json";
  std::string output;
  std::optional<long> max_iters;
  std::optional<double> max_seconds;
  std::optional<double> target_residual;
  std::string discrepancy = "pi";
};

int cmd_dist(const DistArgs& o, std::ostream& out) {
  const Automaton a = load_automaton(o.file);
  if (!(o.lambda > 0.0 && o.lambda <= 1.0)) throw InputError("lambda must lie in (0,1]");
  DistMatrix d;
  nlohmann::ordered_json trace;
  if (o.method == "spi") {
    SpiOptions so;
    so.eps = o.eps;
    so.precompute_bisim = !o.no_precompute;
    if (o.discrepancy == "vi") {
      so.discrepancy.method = DiscrepancyMethod::ValueIteration;
      so.discrepancy.tolerance = o.eps / 10.0;
    }
    const auto t = spi(a, o.lambda, so);
    d = t.final;
    trace["method"] = "spi";
    trace["iterations"] = t.iterations;
    trace["tp_count"] = t.tp_count;
    trace["outer_loops"] = t.outer_loops;
    trace["wall_time"] = t.wall_time;
  } else {
    ViBudget b{o.max_iters, o.max_seconds, o.target_residual};
    if (!b.max_iters && !b.max_seconds && !b.target_residual) b.target_residual = o.eps;
    const auto r = vi_run(a, o.lambda, b);
    d = r.d;
    trace["method"] = "vi";
    trace["iterations"] = r.iters;
    trace["tp_count"] = r.tp_count;
    trace["wall_time"] = r.wall_time;
    trace["residual"] = r.residual;
  }
  emit(o.format == "csv" ? matrix_csv(a, d) : matrix_json(a, d, trace), o.output, out);
  return 0;
}

struct GenArgs {
  int states = 10;
  std::string nd = "1..3";
  std::string prob = "2..3";
  int labels = 2;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_gen(const GenArgs& o, std::ostream& out) {
  GenParams p;
  p.n = o.states;
  p.nd_degree = parse_range(o.nd);
  p.prob_degree = parse_range(o.prob);
  p.label_count = o.labels;
  p.seed = o.seed;
  if (p.prob_degree.second > p.n) throw InputError("probabilistic degree exceeds the state count");
  emit(serialize_automaton(generate(p)), o.output, out);
  return 0;
}

struct BenchArgs {
  std::string states = "10";
  int count = 1;
  double lambda = 0.8;
  std::uint64_t seed = 0;
  std::string nd = "1..3";
  std::string prob = "2..3";
  int labels = 2;
  double eps = 1e-6;
  int threads = 1;
  std::string format = "csv";
  std::string output;
};

int cmd_bench(const BenchArgs& o, std::ostream& out, std::ostream& err) {
  BenchConfig cfg;
  cfg.states = parse_int_list(o.states);
  cfg.count = o.count;
  cfg.lambda = o.lambda;
  cfg.seed = o.seed;
  cfg.nd_degree = parse_range(o.nd);
  cfg.prob_degree = parse_range(o.prob);
  cfg.labels = o.labels;
  cfg.eps = o.eps;
  cfg.threads = o.threads;
  std::string text = bench_csv_header() + "\n";
  for (const auto& r : run_bench(cfg, &err)) text += bench_csv_row(r) + "\n";
  emit(text, o.output, out);
  return 0;
}

struct CheckArgs {
  std::string file;
  std::string target;
  double eps = 1e-6;
};

int cmd_check(const CheckArgs& o, std::ostream& out) {
  const Automaton a = load_automaton(o.file);
  const auto target = parse_target(a, o.target);
  SpiOptions so;
  so.eps = o.eps;
  const DistMatrix d1 = spi_undiscounted(a, so).final;

  std::size_t violations = 0;
  std::optional<BoundPair> tight;
  double tight_slack = 0.0;
  for (ReachMode mode : {ReachMode::Max, ReachMode::Min}) {
    const auto report = check_bound(a, d1, ReachQuery{target, mode}, o.eps);
    for (const auto& v : report.violations)
      out << (mode == ReachMode::Max ? "max" : "min") << " violation (" << a.state_names[v.s] << ","
          << a.state_names[v.t] << "): gap " << v.gap << " exceeds bound " << v.bound << "\n";
    violations += report.violations.size();
    if (report.tightest.s >= 0) {
      const double slack = report.tightest.bound - report.tightest.gap;
      if (!tight || slack < tight_slack - 1e-12) {
        tight = report.tightest;
        tight_slack = slack;
      }
    }
  }
  out << violations << " violations";
  if (tight)
    out << "; tightest pair (" << a.state_names[tight->s] << "," << a.state_names[tight->t]
        << "): gap " << tight->gap << " vs bound " << tight->bound;
  else
    out << "; no pair with a positive gap";
  out << "\n";
  return violations == 0 ? 0 : 3;
}

struct GameArgs {
  std::string file;
  double lambda = 1.0;
  std::string output;
};

int cmd_game(const GameArgs& o, std::ostream& out) {
  const Automaton a = load_automaton(o.file);
  emit(serialize_game(build_game(a, o.lambda)), o.output, out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic bisimilarity distances for probabilistic automata"};
  app.require_subcommand(1);

  DistArgs dist;
  auto* sd = app.add_subcommand("dist", "Compute the distance matrix of an automaton");
  sd->add_option("file", dist.file, "Automaton file")->required();
  sd->add_option("--lambda", dist.lambda, "Discount factor in (0,1]");
  sd->add_option("--eps", dist.eps, "Tolerance");
  sd->add_option("--method", dist.method, "spi or vi")->check(CLI::IsMember({"spi", "vi"}));
  sd->add_flag("--no-bisim-precompute", dist.no_precompute, "Do not clamp bisimilar pairs to 0");
  sd->add_option("--out", dist.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sd->add_option("-o,--output", dist.output, "Write to this file instead of stdout");
  sd->add_option("--max-iters", dist.max_iters, "Value iteration: number of iterations");
  sd->add_option("--max-seconds", dist.max_seconds, "Value iteration: time budget");
  sd->add_option("--target-residual", dist.target_residual, "Value iteration: step-change target");
  sd->add_option("--discrepancy", dist.discrepancy, "Discrepancy solver: pi or vi")
      ->check(CLI::IsMember({"pi", "vi"}));

  GenArgs gen;
  auto* sg = app.add_subcommand("gen", "Generate a random automaton");
  sg->add_option("--states", gen.states, "Number of states");
  sg->add_option("--nd-degree", gen.nd, "Transitions per state, a..b");
  sg->add_option("--prob-degree", gen.prob, "Support size per distribution, a..b");
  sg->add_option("--labels", gen.labels, "Number of labels");
  sg->add_option("--seed", gen.seed, "Random seed");
  sg->add_option("--out", gen.output, "Output file (stdout when omitted)");

  BenchArgs bench;
  auto* sb = app.add_subcommand("bench", "Compare policy iteration against value iteration");
  sb->add_option("--states", bench.states, "State counts, e.g. 10,20 or 10..12");
  sb->add_option("--count", bench.count, "Instances per state count");
  sb->add_option("--lambda", bench.lambda, "Discount factor in (0,1]");
  sb->add_option("--seed", bench.seed, "Seed of the first instance");
  sb->add_option("--nd-degree", bench.nd, "Transitions per state, a..b");
  sb->add_option("--prob-degree", bench.prob, "Support size per distribution, a..b");
  sb->add_option("--labels", bench.labels, "Number of labels");
  sb->add_option("--eps", bench.eps, "Tolerance");
  sb->add_option("--threads", bench.threads, "Worker threads (capped by BISIMDIST_THREADS)");
  sb->add_option("--out", bench.format, "Report format")->check(CLI::IsMember({"csv"}));
  sb->add_option("-o,--output", bench.output, "Write to this file instead of stdout");

  CheckArgs check;
  auto* sc = app.add_subcommand("check", "Verify the reachability bound against d1");
  sc->add_option("file", check.file, "Automaton file")->required();
  sc->add_option("--target", check.target, "Comma-separated target labels")->required();
  sc->add_option("--eps", check.eps, "Tolerance");

  GameArgs game;
  auto* sgm = app.add_subcommand("game", "Write the bisimilarity game of a small automaton");
  sgm->add_option("file", game.file, "Automaton file")->required();
  sgm->add_option("--lambda", game.lambda, "Discount factor in (0,1]");
  sgm->add_option("-o,--output", game.output, "Write to this file instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (sd->parsed()) return cmd_dist(dist, out);
    if (sg->parsed()) return cmd_gen(gen, out);
    if (sb->parsed()) return cmd_bench(bench, out, err);
    if (sc->parsed()) return cmd_check(check, out);
    if (sgm->parsed()) return cmd_game(game, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace bisimdist::cli
