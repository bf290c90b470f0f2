#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace bisimdist {

struct BenchConfig {
  std::vector<int> states{10};
  int count = 1;
  double lambda = 0.8;
  std::uint64_t seed = 0;
  std::pair<int, int> nd_degree{1, 3};
  std::pair<int, int> prob_degree{2, 3};
  int labels = 2;
  double eps = 1e-6;
  int threads = 1;  // further capped by BISIMDIST_THREADS
};

struct BenchRecord {
  int n = 0;
  std::pair<int, int> k_range;
  std::pair<int, int> p_range;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::string method = "spi+vi";
  double time_sec = 0.0;  // policy iteration wall time
  long tp_count = 0;      // policy iteration transportation problems
  long coupling_count = 0;
  long outer_loops = 0;
  long vi_iters = 0;
  double error = 0.0;  // d_spi - d_vi at the pair of largest absolute difference
};

/// Worker count after applying the BISIMDIST_THREADS cap.
int effective_threads(int requested);

/// Runs every instance (states x count, instance seed = seed + index) and
/// returns records in instance order. Failed instances are reported to `log`
/// and produce no record.
std::vector<BenchRecord> run_bench(const BenchConfig& cfg, std::ostream* log = nullptr);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRecord& r);

}  // namespace bisimdist
