#pragma once
// Best completion of a partial m-vector under the cluster-size prior.
//
// Given the m-vector m0 of a prefix of the data and a final point count
// n_target, max_completion_log_prob estimates the best log P(m | alpha)
// achievable over all m reachable from m0 by adding the remaining points one
// at a time (each new point either starts a new cluster or grows an existing
// one). Each point takes the action with the largest per-action change in
// log P; ties prefer growing the largest eligible cluster, then grows of
// smaller clusters, then starting a new cluster.
//
// Greedy completion is a heuristic: per-step argmax choices do not always
// reach the best completion (see docs/completion-optimality.md for a minimal
// counterexample). Results are memoized in a thread-safe LRU cache keyed on
// (m0, n_target, alpha).

#include <cstdint>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "dpmix/partition.hpp"

namespace dpmix {

class CompletionMemo {
 public:
  explicit CompletionMemo(std::size_t capacity = 1'000'000) : capacity_(capacity) {}

  std::optional<double> get(const std::string& key);
  void put(const std::string& key, double value);
  std::size_t size() const;

  // Process-wide cache shared by default across searches and threads.
  static CompletionMemo& global();

 private:
  using ListIt = std::list<std::pair<std::string, double>>::iterator;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<std::pair<std::string, double>> order_;  // front = most recent
  std::unordered_map<std::string, ListIt> map_;
};

// See file comment. `memo` nullptr means the process-global cache;
// `accelerate` toggles the closed-form fast-forward (identical results, used
// by tests that compare against the plain per-point loop).
double max_completion_log_prob(const MVector& m0, std::int64_t n_target, double alpha,
                               CompletionMemo* memo = nullptr, bool accelerate = true);

}  // namespace dpmix
