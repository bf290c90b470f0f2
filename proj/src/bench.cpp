#include "bisimdist/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "bisimdist/automaton.hpp"
#include "bisimdist/error.hpp"
#include "bisimdist/policy_iter.hpp"
#include "bisimdist/value_iter.hpp"

namespace bisimdist {

namespace {

struct Job {
  int n;
  std::uint64_t seed;
};

BenchRecord run_one(const BenchConfig& cfg, const Job& job) {
  GenParams gp;
  gp.n = job.n;
  gp.nd_degree = cfg.nd_degree;
  gp.prob_degree = cfg.prob_degree;
  gp.label_count = cfg.labels;
  gp.seed = job.seed;
  const Automaton a = generate(gp);

  SpiOptions so;
  so.eps = cfg.eps;
  const SpiTrace trace = spi(a, cfg.lambda, so);

  ViBudget budget;
  budget.max_seconds = trace.wall_time;
  const ViResult vi = vi_run(a, cfg.lambda, budget);

  BenchRecord r;
  r.n = job.n;
  r.k_range = cfg.nd_degree;
  r.p_range = cfg.prob_degree;
  r.seed = job.seed;
  r.lambda = cfg.lambda;
  r.time_sec = trace.wall_time;
  r.tp_count = trace.tp_count;
  r.coupling_count = trace.iterations;
  r.outer_loops = trace.outer_loops;
  r.vi_iters = vi.iters;
  const DistMatrix diff = trace.final - vi.d;
  Eigen::Index i = 0, j = 0;
  diff.cwiseAbs().maxCoeff(&i, &j);
  r.error = diff(i, j);
  return r;
}

}  // namespace

int effective_threads(int requested) {
  int t = std::max(1, requested);
  if (const char* env = std::getenv("BISIMDIST_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) t = std::min(t, cap);
  }
  return t;
}

std::vector<BenchRecord> run_bench(const BenchConfig& cfg, std::ostream* log) {
  if (cfg.count < 0) throw InputError("negative instance count");
  if (!(cfg.lambda > 0.0 && cfg.lambda <= 1.0)) throw InputError("lambda must lie in (0,1]");
  for (int n : cfg.states)
    if (n < 1) throw InputError("state counts must be positive");

  std::vector<Job> jobs;
  for (int n : cfg.states)
    for (int i = 0; i < cfg.count; ++i) jobs.push_back({n, cfg.seed + static_cast<std::uint64_t>(i)});

  std::vector<std::optional<BenchRecord>> slots(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      try {
        slots[k] = run_one(cfg, jobs[k]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int threads = std::min<int>(effective_threads(cfg.threads), std::max<std::size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<BenchRecord> out;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (slots[k]) {
      out.push_back(*slots[k]);
    } else if (log) {
      *log << "instance n=" << jobs[k].n << " seed=" << jobs[k].seed << " failed: " << errors[k]
           << "\n";
    }
  }
  return out;
}

std::string bench_csv_header() {
  return "n,k_lo,k_hi,p_lo,p_hi,seed,lambda,method,time_sec,tp_count,coupling_count,outer_loops,"
         "vi_iters,error";
}

std::string bench_csv_row(const BenchRecord& r) {
  std::ostringstream out;
  out.precision(17);
  out << r.n << ',' << r.k_range.first << ',' << r.k_range.second << ',' << r.p_range.first << ','
      << r.p_range.second << ',' << r.seed << ',' << r.lambda << ',' << r.method << ',' << r.time_sec
      << ',' << r.tp_count << ',' << r.coupling_count << ',' << r.outer_loops << ',' << r.vi_iters
      << ',' << r.error;
  return out.str();
}

}  // namespace bisimdist
