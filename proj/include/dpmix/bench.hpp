#pragma once

// Benchmark harness: a fixed matrix of synthetic Gaussian datasets crossed
// with every solver configuration (exact enumeration where feasible, search
// under each scorer with and without a beam, and both samplers under the
// multi-restart protocol).  Rows carry enough to compare solution quality
// (negative-log-joint ratio against the best known value per dataset) and
// cost (wall time, queue traffic).
//
// Determinism: every dataset and every run seed is derived from the single
// config seed, and cells are independent, so results are identical no matter
// how many worker threads execute the matrix.

#include <cstdint>
#include <string>
#include <vector>

namespace dpmix {

struct BenchConfig {
  std::vector<std::int64_t> sizes{4, 8, 10, 20, 50};
  int seeds_per_size = 10;   // datasets per size
  double alpha = 1.0;
  int dim = 2;
  double prior_var = 10.0;
  double obs_var = 1.0;
  std::int64_t sampler_iters = 1000;  // per run, both samplers (15 × 1000 protocol)
  int sampler_runs = 15;              // restart-protocol runs
  std::int64_t enqueue_budget = 200000;  // search abort threshold (0 = unlimited)
  std::int64_t exact_max_n = 12;     // exhaustive enumeration cutoff
  int threads = 0;                   // 0 = hardware concurrency
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::int64_t n = 0;
  int dataset_index = 0;
  std::string method;
  bool ok = false;          // false: search aborted on its enqueue budget
  double log_joint = 0.0;
  double nll_ratio = 0.0;   // (-log_joint) / (-best log_joint in this cell)
  std::int64_t enqueued = 0;   // searches only; 0 for samplers/exact
  std::int64_t dequeued = 0;
  double wall_time_ms = 0.0;
  double fscore = 0.0;      // pairwise F-score against the generating truth
};

struct BenchResult {
  BenchConfig config;
  std::vector<BenchRow> rows;  // grouped by (size, dataset), method order fixed
};

// Names, in emission order per cell: exact (only when n <= exact_max_n),
// search_{trivial,admissible,inadmissible}_{inf,beam10}, gibbs_protocol,
// splitmerge_protocol.
std::vector<std::string> bench_method_names(std::int64_t n, const BenchConfig& cfg);

BenchResult run_benchmark(const BenchConfig& cfg);

// CSV renderers: one row per BenchRow, and a per-(size, method) aggregate of
// the ok rows (mean nll_ratio, mean wall time, mean F-score, ok count).
std::string bench_rows_csv(const BenchResult& result);
std::string bench_summary_csv(const BenchResult& result);

}  // namespace dpmix
