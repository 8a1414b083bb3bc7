#pragma once
// Cluster-size multisets ("m-vectors") and their exchangeable prior.
//
// An m-vector records, for each cluster size s >= 1, how many clusters of that
// size a partition has: m[s] = count. The prior over m-vectors induced by the
// Chinese-restaurant process with concentration alpha on N points is
//
//   P(m) = N! / alpha^(N) * alpha^K / prod_s ( s^{m_s} * m_s! ),
//
// where K = sum_s m_s is the number of clusters and alpha^(N) is the rising
// factorial alpha(alpha+1)...(alpha+N-1). All arithmetic is in log space.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpmix/common.hpp"

namespace dpmix {

class MVector {
 public:
  using Entry = std::pair<std::int64_t, std::int64_t>;  // (size, count), count > 0

  MVector() = default;

  // Builds from explicit (size, count) pairs; validates and normalizes.
  static MVector from_entries(std::vector<Entry> entries);

  // Builds from a per-point cluster assignment (labels may be arbitrary ints).
  static MVector from_assignment(const std::vector<int>& assign);

  // Builds from a list of cluster sizes.
  static MVector from_sizes(const std::vector<std::int64_t>& sizes);

  const std::vector<Entry>& entries() const { return e_; }
  std::int64_t total_points() const;
  std::int64_t num_clusters() const;
  std::int64_t count_of(std::int64_t size) const;
  std::int64_t largest_size() const;  // 0 when empty
  bool empty() const { return e_.empty(); }

  // Adds a new cluster of size 1.
  void add_new_cluster();

  // Moves one cluster from `size` to `size + 1`; m[size] must be positive.
  void grow(std::int64_t size);

  // Byte string uniquely identifying the multiset; used as a memo key.
  std::string canonical_key() const;

  bool operator==(const MVector& o) const { return e_ == o.e_; }

 private:
  std::vector<Entry> e_;  // ascending by size, counts > 0
  void insert_count(std::int64_t size, std::int64_t delta);
};

// log P(m | alpha) for the prior above. The empty m-vector (N = 0) has
// probability one. alpha must be positive.
double log_prob_m(const MVector& m, double alpha);

// Change in log P when a new singleton cluster is added, up to the additive
// size-normalization term log(N+1) - log(alpha+N) shared by every action:
//   log alpha - log(m_1 + 1).
double delta_log_new(const MVector& m, double alpha);

// Change in log P when a cluster of size `size` grows to size+1, up to the
// same shared normalization term:
//   log size - log(size+1) + log m_size - log(m_{size+1} + 1).
// m_size must be positive.
double delta_log_grow(const MVector& m, std::int64_t size);

// log of the number of set partitions of {1..N} whose cluster sizes form
// exactly this multiset:  N! / (prod_s (s!)^{m_s} * m_s!).
double log_partition_count(const MVector& m);

// log probability of ONE set partition with this size multiset under the
// sequential seating process with concentration alpha:
//   log_prob_m(m, alpha) - log_partition_count(m)
//     = K log alpha + sum_s m_s * lgamma(s) - log rising(alpha, N).
// Every set partition sharing a size multiset has the same probability, and
// these probabilities sum to one over all set partitions. This is the prior
// the collapsed samplers leave invariant; log_prob_m is the size-multiset
// marginal used as the search/MAP objective.
double log_prob_partition(const MVector& m, double alpha);

}  // namespace dpmix
