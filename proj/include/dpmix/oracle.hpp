#pragma once
// Exact small-N references: full-partition enumeration, exhaustive MAP,
// normalized posterior tables, and pairwise clustering agreement scores.

#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpmix/common.hpp"
#include "dpmix/partition.hpp"

namespace dpmix {

// Log joint of a complete assignment: the cluster-size prior plus the
// chain-rule product of cluster predictives taken in data order.
template <class Model>
double log_joint(const Model& model, const std::vector<typename Model::Datum>& data,
                 const std::vector<int>& assign, double alpha) {
  check_arg(data.size() == assign.size(), "log_joint: assignment length mismatch");
  std::unordered_map<int, typename Model::Stats> stats;
  double log_data = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto [it, inserted] = stats.try_emplace(assign[i], model.empty_stats());
    log_data += model.log_predictive(data[i], it->second);
    model.add(it->second, data[i]);
  }
  return log_data + log_prob_m(MVector::from_assignment(assign), alpha);
}

// Visits every set partition of the data in restricted-growth-string order
// (first point always label 0; a new label is always one past the largest so
// far). The visitor receives (assign, log_data, cluster_sizes); log_data is
// maintained incrementally along the enumeration tree.
template <class Model, class Visitor>
void for_each_partition(const Model& model, const std::vector<typename Model::Datum>& data,
                        Visitor&& visit) {
  const std::size_t n = data.size();
  std::vector<int> assign(n, 0);
  std::vector<typename Model::Stats> clusters;
  std::vector<std::int64_t> sizes;
  auto rec = [&](auto&& self, std::size_t i, double log_data) -> void {
    if (i == n) {
      visit(const_cast<const std::vector<int>&>(assign), log_data,
            const_cast<const std::vector<std::int64_t>&>(sizes));
      return;
    }
    const std::size_t k = clusters.size();
    for (std::size_t c = 0; c <= k; ++c) {
      if (c == k) {
        clusters.push_back(model.empty_stats());
        sizes.push_back(0);
      }
      const double lp = model.log_predictive(data[i], clusters[c]);
      model.add(clusters[c], data[i]);
      ++sizes[c];
      assign[i] = static_cast<int>(c);
      self(self, i + 1, log_data + lp);
      --sizes[c];
      model.remove(clusters[c], data[i]);
      if (c == k) {
        clusters.pop_back();
        sizes.pop_back();
      }
    }
  };
  if (n > 0) rec(rec, 0, 0.0);
}

struct PartitionResult {
  std::vector<int> assignment;
  double log_joint = kNegInf;
};

// Exact MAP by enumeration. Ties resolve to the lexicographically smallest
// canonical assignment (the enumeration order visits those first and the
// comparison is strict). Guarded by max_n: enumeration is Bell(N) work.
template <class Model>
PartitionResult exhaustive_map(const Model& model, const std::vector<typename Model::Datum>& data,
                               double alpha, int max_n = 12) {
  check_arg(!data.empty(), "exhaustive_map: empty data");
  check_arg(static_cast<int>(data.size()) <= max_n,
            "exhaustive_map: data size exceeds max_n");
  PartitionResult best;
  for_each_partition(model, data,
                     [&](const std::vector<int>& assign, double log_data,
                         const std::vector<std::int64_t>& sizes) {
                       const double lp =
                           log_data + log_prob_m(MVector::from_sizes(sizes), alpha);
                       if (lp > best.log_joint) {
                         best.log_joint = lp;
                         best.assignment = assign;
                       }
                     });
  return best;
}

struct PosteriorEntry {
  std::vector<int> assignment;
  double log_joint;  // search/MAP objective: data marginal + size-multiset prior
  double log_prob;   // normalized posterior probability of this set partition
};

// The exact posterior over all set partitions, normalized with logsumexp.
// Entries appear in enumeration (restricted-growth-string) order.
//
// Each partition's posterior mass uses the per-partition seating prior
// (log_prob_partition); summing the resulting probabilities over all
// partitions that share a size multiset recovers the size-multiset prior's
// own posterior, and the samplers' stationary distribution is exactly these
// weights. log_joint instead records the objective the search and the MAP
// oracle maximize, whose prior factor is the size-multiset marginal; the max
// of log_joint over entries equals exhaustive_map's optimum.
template <class Model>
std::vector<PosteriorEntry> enumerate_posterior(const Model& model,
                                                const std::vector<typename Model::Datum>& data,
                                                double alpha, int max_n = 12) {
  check_arg(!data.empty(), "enumerate_posterior: empty data");
  check_arg(static_cast<int>(data.size()) <= max_n,
            "enumerate_posterior: data size exceeds max_n");
  std::vector<PosteriorEntry> entries;
  std::vector<double> lps;
  for_each_partition(model, data,
                     [&](const std::vector<int>& assign, double log_data,
                         const std::vector<std::int64_t>& sizes) {
                       const MVector m = MVector::from_sizes(sizes);
                       const double lj = log_data + log_prob_m(m, alpha);
                       const double lp = log_data + log_prob_partition(m, alpha);
                       entries.push_back(PosteriorEntry{assign, lj, lp});
                       lps.push_back(lp);
                     });
  const double norm = logsumexp(lps);
  check_logic(std::isfinite(norm), "enumerate_posterior: non-finite normalizer");
  for (auto& e : entries) e.log_prob -= norm;
  return entries;
}

// Max log joint over all complete assignments that extend the given prefix
// (labels of the first prefix.size() points, canonical form). Used to audit
// search upper bounds.
template <class Model>
double best_completion_log_joint(const Model& model,
                                 const std::vector<typename Model::Datum>& data,
                                 double alpha, const std::vector<int>& prefix) {
  const std::size_t n = data.size();
  const std::size_t n0 = prefix.size();
  check_arg(n0 <= n, "best_completion_log_joint: prefix longer than data");
  std::vector<int> assign = canonicalize_assignment(prefix);
  assign.resize(n, 0);
  std::vector<typename Model::Stats> clusters;
  std::vector<std::int64_t> sizes;
  double log_data0 = 0.0;
  for (std::size_t i = 0; i < n0; ++i) {
    const int c = assign[i];
    while (static_cast<int>(clusters.size()) <= c) {
      clusters.push_back(model.empty_stats());
      sizes.push_back(0);
    }
    log_data0 += model.log_predictive(data[i], clusters[c]);
    model.add(clusters[c], data[i]);
    ++sizes[c];
  }
  double best = kNegInf;
  auto rec = [&](auto&& self, std::size_t i, double log_data) -> void {
    if (i == n) {
      best = std::max(best, log_data + log_prob_m(MVector::from_sizes(sizes), alpha));
      return;
    }
    const std::size_t k = clusters.size();
    for (std::size_t c = 0; c <= k; ++c) {
      if (c == k) {
        clusters.push_back(model.empty_stats());
        sizes.push_back(0);
      }
      const double lp = model.log_predictive(data[i], clusters[c]);
      model.add(clusters[c], data[i]);
      ++sizes[c];
      assign[i] = static_cast<int>(c);
      self(self, i + 1, log_data + lp);
      --sizes[c];
      model.remove(clusters[c], data[i]);
      if (c == k) {
        clusters.pop_back();
        sizes.pop_back();
      }
    }
  };
  rec(rec, n0, log_data0);
  return best;
}

// ---------------------------------------------------------------------------
// Pairwise agreement between two clusterings of the same points.
// A "pair" is an unordered pair of distinct points placed in the same cluster.
//   precision = correct pairs / predicted pairs (1 when no predicted pairs)
//   recall    = correct pairs / true pairs      (1 when no true pairs)
// The headline f-score is the geometric mean sqrt(precision * recall); the
// harmonic variant 2pr/(p+r) is also reported.
// ---------------------------------------------------------------------------

struct PairwiseScores {
  double precision = 1.0;
  double recall = 1.0;
  double fscore_geometric = 1.0;
  double fscore_harmonic = 1.0;
};

inline PairwiseScores pairwise_scores(const std::vector<int>& pred,
                                      const std::vector<int>& truth) {
  check_arg(pred.size() == truth.size(), "pairwise_scores: length mismatch");
  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> pred_sizes, truth_sizes;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++joint[{pred[i], truth[i]}];
    ++pred_sizes[pred[i]];
    ++truth_sizes[truth[i]];
  }
  auto pairs = [](std::int64_t c) { return c * (c - 1) / 2; };
  std::int64_t tp = 0, predicted = 0, actual = 0;
  for (const auto& [key, c] : joint) tp += pairs(c);
  for (const auto& [key, c] : pred_sizes) predicted += pairs(c);
  for (const auto& [key, c] : truth_sizes) actual += pairs(c);
  PairwiseScores out;
  out.precision = predicted == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(predicted);
  out.recall = actual == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(actual);
  out.fscore_geometric = std::sqrt(out.precision * out.recall);
  out.fscore_harmonic = (out.precision + out.recall) > 0.0
                            ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                            : 0.0;
  return out;
}

inline double pairwise_fscore(const std::vector<int>& pred, const std::vector<int>& truth) {
  return pairwise_scores(pred, truth).fscore_geometric;
}

}  // namespace dpmix
