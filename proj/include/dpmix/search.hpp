#pragma once
// Best-first search for the MAP clustering.
//
// States are prefixes of the (reordered) data with a cluster assignment for
// each prefix point. The queue pops the state with the best score; the first
// complete state popped is returned. A state's score is
//
//   score = best completion of the prefix's cluster-size multiset (prior part)
//         + exact log data term of the prefix
//         + a scorer-specific bound on the remaining points' data term:
//       trivial       0 for every future point,
//       admissible    per future point, the max over prefix clusters plus a
//                     fresh cluster of the replica-saturated predictive, with
//                     a replica budget equal to the number of points between
//                     the prefix end and that point,
//       inadmissible  each future point's prior (empty-cluster) predictive.
//
// Scores of complete states equal the exact log joint under all three
// scorers. Queue ties break by deeper state first, then earlier insertion;
// comparisons are exact floating-point.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <set>
#include <unordered_map>
#include <vector>

#include "dpmix/common.hpp"
#include "dpmix/completion.hpp"
#include "dpmix/partition.hpp"
#include "dpmix/rng.hpp"

namespace dpmix {

enum class Scorer { kTrivial, kAdmissible, kInadmissible };
enum class DataOrder { kAscending, kDescending, kGiven, kRandom };

struct PoppedRecord {
  std::vector<int> prefix;  // assignment of the prefix, search order
  double score = 0.0;
};

struct SearchOptions {
  Scorer scorer = Scorer::kInadmissible;
  std::int64_t beam = 100;        // 0 = unbounded queue
  DataOrder order = DataOrder::kAscending;
  std::uint64_t seed = 0;         // consumed only by order == kRandom
  std::int64_t max_enqueued = 0;  // 0 = unlimited; exceeding it aborts the search
  double audit_tolerance = 0.0;   // > 0: re-derive every pushed score from scratch
  CompletionMemo* memo = nullptr;              // nullptr = process-global cache
  std::vector<PoppedRecord>* trace = nullptr;  // optional pop log (search order)
};

struct SearchResult {
  std::vector<int> assignment;  // original data order, canonical labels
  double log_joint = kNegInf;
  std::int64_t enqueued = 0;
  std::int64_t dequeued = 0;
  double wall_time_ms = 0.0;
  std::vector<int> order;  // order[i] = original index of the i-th searched point
  bool aborted = false;    // true when max_enqueued stopped the search
};

// Returns the permutation order[i] = original index of the i-th point to
// search. kAscending puts points with the lowest prior (empty-cluster)
// predictive first, kDescending the opposite; ties keep original order.
template <class Model>
std::vector<int> order_data(const Model& model, const std::vector<typename Model::Datum>& data,
                            DataOrder order, std::uint64_t seed = 0) {
  std::vector<int> perm(data.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  if (order == DataOrder::kGiven) return perm;
  if (order == DataOrder::kRandom) {
    Rng rng(seed);
    rng.shuffle(perm);
    return perm;
  }
  const auto empty = model.empty_stats();
  std::vector<double> h(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) h[i] = model.log_predictive(data[i], empty);
  std::sort(perm.begin(), perm.end(), [&](int a, int b) {
    if (h[a] != h[b]) return order == DataOrder::kAscending ? h[a] < h[b] : h[a] > h[b];
    return a < b;
  });
  return perm;
}

namespace detail {

struct SatKey {
  std::uint64_t cluster_id;  // member-set hash (0 for the empty cluster)
  std::int64_t cluster_n;
  std::int32_t point;
  std::int64_t budget;
  bool operator==(const SatKey& o) const {
    return cluster_id == o.cluster_id && cluster_n == o.cluster_n && point == o.point &&
           budget == o.budget;
  }
};

struct SatKeyHash {
  std::size_t operator()(const SatKey& k) const {
    std::uint64_t s = k.cluster_id;
    std::uint64_t h = splitmix64(s);
    s = h ^ (static_cast<std::uint64_t>(k.cluster_n) * 0x9E3779B97F4A7C15ULL);
    h = splitmix64(s);
    s = h ^ ((static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.point)) << 32) |
             (static_cast<std::uint64_t>(k.budget) & 0xFFFFFFFFULL));
    return static_cast<std::size_t>(splitmix64(s));
  }
};

template <class Model>
struct SearchNode {
  double score = 0.0;
  std::int32_t depth = 0;
  std::int64_t seq = 0;  // insertion counter; makes the queue order total
  double log_data = 0.0;
  std::vector<int> assign;
  std::vector<typename Model::Stats> clusters;
  std::vector<std::int64_t> sizes;
  std::vector<std::uint64_t> hashes;  // member-set hash per cluster
};

// Queue order: best score first, then deeper, then earlier insertion.
template <class Model>
struct NodeBefore {
  using Ptr = std::unique_ptr<SearchNode<Model>>;
  bool operator()(const Ptr& a, const Ptr& b) const {
    if (a->score != b->score) return a->score > b->score;
    if (a->depth != b->depth) return a->depth > b->depth;
    return a->seq < b->seq;
  }
};

}  // namespace detail

// Scorer-specific bound computed from scratch for a prefix of the ordered
// data. Exposed for tests; dpsearch maintains the same quantity incrementally.
template <class Model>
double score_state(const Model& model, const std::vector<typename Model::Datum>& ordered,
                   double alpha, const std::vector<int>& prefix, Scorer scorer,
                   CompletionMemo* memo = nullptr) {
  const std::size_t n = ordered.size();
  const std::size_t n0 = prefix.size();
  check_arg(n0 <= n, "score_state: prefix longer than data");
  const std::vector<int> assign = canonicalize_assignment(prefix);
  std::vector<typename Model::Stats> clusters;
  std::vector<std::int64_t> sizes;
  double log_data = 0.0;
  for (std::size_t i = 0; i < n0; ++i) {
    const int c = assign[i];
    while (static_cast<int>(clusters.size()) <= c) {
      clusters.push_back(model.empty_stats());
      sizes.push_back(0);
    }
    log_data += model.log_predictive(ordered[i], clusters[c]);
    model.add(clusters[c], ordered[i]);
    ++sizes[c];
  }
  double score = log_data +
                 max_completion_log_prob(MVector::from_sizes(sizes),
                                         static_cast<std::int64_t>(n), alpha, memo);
  if (scorer == Scorer::kTrivial || n0 == n) return score;

  const auto empty = model.empty_stats();
  if (scorer == Scorer::kInadmissible) {
    for (std::size_t m = n0; m < n; ++m) score += model.log_predictive(ordered[m], empty);
    return score;
  }
  double norm_cap = 0.0;
  for (const auto& x : ordered) norm_cap = std::max(norm_cap, model.datum_norm(x));
  for (std::size_t m = n0; m < n; ++m) {
    const std::int64_t budget = static_cast<std::int64_t>(m - n0);
    double best = model.saturated_predictive(ordered[m], empty, budget, norm_cap);
    for (const auto& cl : clusters)
      best = std::max(best, model.saturated_predictive(ordered[m], cl, budget, norm_cap));
    score += best;
  }
  return score;
}

template <class Model>
SearchResult dpsearch(const Model& model, const std::vector<typename Model::Datum>& data,
                      double alpha, const SearchOptions& opt = {}) {
  using Node = detail::SearchNode<Model>;
  using NodePtr = std::unique_ptr<Node>;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = data.size();
  check_arg(n >= 1, "dpsearch: empty data");
  check_arg(alpha > 0.0, "dpsearch: alpha must be positive");
  check_arg(opt.beam >= 0, "dpsearch: beam must be >= 0 (0 = unbounded)");

  SearchResult result;
  result.order = order_data(model, data, opt.order, opt.seed);
  std::vector<typename Model::Datum> ordered(n);
  for (std::size_t i = 0; i < n; ++i) ordered[i] = data[result.order[i]];

  CompletionMemo* memo = opt.memo ? opt.memo : &CompletionMemo::global();

  // Prior predictives and their suffix sums (the inadmissible bound), plus
  // the dataset-wide norm cap used by the replica-saturated bound.
  const auto empty = model.empty_stats();
  std::vector<double> prior_marg(n);
  double norm_cap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    prior_marg[i] = model.log_predictive(ordered[i], empty);
    norm_cap = std::max(norm_cap, model.datum_norm(ordered[i]));
  }
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + prior_marg[i];

  // Saturated-predictive cache, keyed on (cluster member set, point, budget).
  std::unordered_map<detail::SatKey, double, detail::SatKeyHash> sat_cache;
  auto saturated = [&](std::int32_t point, const typename Model::Stats* cl,
                       std::uint64_t cluster_id, std::int64_t budget) {
    detail::SatKey key{cluster_id, cl ? cl->n : 0, point, budget};
    auto it = sat_cache.find(key);
    if (it != sat_cache.end()) return it->second;
    const double v =
        model.saturated_predictive(ordered[point], cl ? *cl : empty, budget, norm_cap);
    sat_cache.emplace(key, v);
    return v;
  };

  auto future_bound = [&](const Node& node) {
    if (static_cast<std::size_t>(node.depth) == n || opt.scorer == Scorer::kTrivial)
      return 0.0;
    if (opt.scorer == Scorer::kInadmissible) return suffix[node.depth];
    double bound = 0.0;
    for (std::size_t m = node.depth; m < n; ++m) {
      const std::int64_t budget = static_cast<std::int64_t>(m) - node.depth;
      double best = saturated(static_cast<std::int32_t>(m), nullptr, 0, budget);
      for (std::size_t c = 0; c < node.clusters.size(); ++c)
        best = std::max(best, saturated(static_cast<std::int32_t>(m), &node.clusters[c],
                                        node.hashes[c], budget));
      bound += best;
    }
    return bound;
  };

  auto score_of = [&](Node& node) {
    const double prior_part = max_completion_log_prob(
        MVector::from_sizes(node.sizes), static_cast<std::int64_t>(n), alpha, memo);
    node.score = node.log_data + prior_part + future_bound(node);
    if (opt.audit_tolerance > 0.0) {
      const double fresh = score_state(model, ordered, alpha, node.assign, opt.scorer, memo);
      check_logic(std::abs(fresh - node.score) <= opt.audit_tolerance,
                  "dpsearch: incremental score disagrees with scratch recomputation");
    }
  };

  std::set<NodePtr, detail::NodeBefore<Model>> queue;
  std::int64_t seq = 0;
  auto push = [&](NodePtr node) {
    node->seq = seq++;
    queue.insert(std::move(node));
    ++result.enqueued;
  };

  {
    auto root = std::make_unique<Node>();
    score_of(*root);
    push(std::move(root));
  }

  auto finish_wall = [&]() {
    result.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
  };

  while (true) {
    check_logic(!queue.empty(), "dpsearch: queue exhausted");
    NodePtr top = std::move(queue.extract(queue.begin()).value());
    ++result.dequeued;
    if (opt.trace) opt.trace->push_back(PoppedRecord{top->assign, top->score});

    if (static_cast<std::size_t>(top->depth) == n) {
      std::vector<int> original(n);
      for (std::size_t i = 0; i < n; ++i) original[result.order[i]] = top->assign[i];
      result.assignment = canonicalize_assignment(original);
      result.log_joint = top->score;
      finish_wall();
      return result;
    }

    const std::size_t point = top->depth;
    const std::size_t k = top->clusters.size();
    for (std::size_t c = 0; c <= k; ++c) {
      auto child = std::make_unique<Node>();
      child->depth = top->depth + 1;
      child->assign = top->assign;
      child->assign.push_back(static_cast<int>(c));
      child->clusters = top->clusters;
      child->sizes = top->sizes;
      child->hashes = top->hashes;
      if (c == k) {
        child->clusters.push_back(empty);
        child->sizes.push_back(0);
        child->hashes.push_back(0);
      }
      child->log_data =
          top->log_data + model.log_predictive(ordered[point], child->clusters[c]);
      model.add(child->clusters[c], ordered[point]);
      ++child->sizes[c];
      std::uint64_t pt = static_cast<std::uint64_t>(point);
      child->hashes[c] += splitmix64(pt);
      score_of(*child);
      push(std::move(child));
      if (opt.max_enqueued > 0 && result.enqueued > opt.max_enqueued) {
        result.aborted = true;
        finish_wall();
        return result;
      }
    }

    if (opt.beam > 0) {
      while (static_cast<std::int64_t>(queue.size()) > opt.beam) {
        queue.erase(std::prev(queue.end()));
      }
    }
  }
}

}  // namespace dpmix
