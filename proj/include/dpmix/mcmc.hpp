#pragma once
// Markov-chain samplers over cluster assignments.
//
// gibbs_sweep: one pass of collapsed per-point reassignment. Each point is
// removed from its cluster (emptied clusters are deleted immediately) and
// resampled among {existing cluster d with weight N_d * H(x | d)} and
// {new cluster with weight alpha * H(x)} in log space.
//
// split_merge_step: a Metropolis–Hastings move proposing to split one cluster
// in two or merge two clusters into one. A uniformly random ordered pair of
// distinct points (i, j) anchors the move. If they share a cluster, a split
// is proposed by building a launch state (i and j in separate clusters, the
// rest assigned uniformly) and refining it with a fixed number of restricted
// sweeps; one final restricted sweep draws the proposal and supplies its
// transition probability. If (i, j) are in different clusters, the
// deterministic merge is proposed and the reverse split's transition
// probability is computed by replaying the launch procedure and forcing the
// final sweep to reproduce the current split. Cluster labels stay stable
// within a sweep or step; canonical relabeling happens at the boundaries.
//
// run_protocol: repeated restarts (all-in-one-cluster, all-singletons, and
// uniformly random ceil(log2 N)-cluster inits), tracking the best state seen
// per run and overall.

#include <chrono>
#include <cstdint>
#include <vector>

#include "dpmix/common.hpp"
#include "dpmix/oracle.hpp"
#include "dpmix/partition.hpp"
#include "dpmix/rng.hpp"

namespace dpmix {

template <class Model>
struct ChainState {
  std::vector<int> assign;
  std::vector<typename Model::Stats> clusters;  // indexed by label
  std::vector<std::int64_t> sizes;
  double log_data = 0.0;  // maintained incrementally
};

template <class Model>
ChainState<Model> make_chain_state(const Model& model,
                                   const std::vector<typename Model::Datum>& data,
                                   const std::vector<int>& init_assign) {
  check_arg(data.size() == init_assign.size(), "make_chain_state: assignment length mismatch");
  ChainState<Model> state;
  state.assign = canonicalize_assignment(init_assign);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = state.assign[i];
    while (static_cast<int>(state.clusters.size()) <= c) {
      state.clusters.push_back(model.empty_stats());
      state.sizes.push_back(0);
    }
    state.log_data += model.log_predictive(data[i], state.clusters[c]);
    model.add(state.clusters[c], data[i]);
    ++state.sizes[c];
  }
  return state;
}

// The search/MAP objective evaluated at the chain's current state: exact data
// marginal plus the size-multiset prior. Used to rank visited states; the
// samplers' transition kernels use the per-partition seating prior instead
// (log_prob_partition), which is what collapsed Gibbs leaves invariant.
template <class Model>
double chain_log_joint(const ChainState<Model>& state, double alpha) {
  return state.log_data + log_prob_m(MVector::from_sizes(state.sizes), alpha);
}

// Recomputes log_data from scratch (drift tests and debugging).
template <class Model>
double recompute_log_data(const Model& model, const std::vector<typename Model::Datum>& data,
                          const std::vector<int>& assign) {
  std::unordered_map<int, typename Model::Stats> stats;
  double log_data = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto [it, inserted] = stats.try_emplace(assign[i], model.empty_stats());
    log_data += model.log_predictive(data[i], it->second);
    model.add(it->second, data[i]);
  }
  return log_data;
}

namespace detail {

// Deletes cluster c (must be empty), shifting higher labels down by one.
template <class Model>
void erase_cluster(ChainState<Model>& state, int c) {
  check_logic(state.sizes[c] == 0, "erase_cluster: cluster not empty");
  state.clusters.erase(state.clusters.begin() + c);
  state.sizes.erase(state.sizes.begin() + c);
  for (int& a : state.assign) {
    if (a > c) --a;
  }
}

// Relabels clusters by first appearance in the assignment.
template <class Model>
void canonicalize_chain(ChainState<Model>& state) {
  const std::vector<int> fresh = canonicalize_assignment(state.assign);
  const std::size_t k = state.clusters.size();
  std::vector<int> new_of_old(k, -1);
  for (std::size_t i = 0; i < fresh.size(); ++i) new_of_old[state.assign[i]] = fresh[i];
  std::vector<typename Model::Stats> clusters(k);
  std::vector<std::int64_t> sizes(k, 0);
  for (std::size_t old = 0; old < k; ++old) {
    const int nw = new_of_old[old];
    check_logic(nw >= 0, "canonicalize_chain: unused cluster label");
    clusters[nw] = std::move(state.clusters[old]);
    sizes[nw] = state.sizes[old];
  }
  state.clusters = std::move(clusters);
  state.sizes = std::move(sizes);
  state.assign = fresh;
}

// Log marginal of a member list as one cluster (sequential predictives).
template <class Model>
double member_marginal(const Model& model, const std::vector<typename Model::Datum>& data,
                       const std::vector<int>& members) {
  auto stats = model.empty_stats();
  double lp = 0.0;
  for (int n : members) {
    lp += model.log_predictive(data[n], stats);
    model.add(stats, data[n]);
  }
  return lp;
}

}  // namespace detail

template <class Model>
void gibbs_sweep(const Model& model, const std::vector<typename Model::Datum>& data,
                 double alpha, ChainState<Model>& state, Rng& rng) {
  check_arg(alpha > 0.0, "gibbs_sweep: alpha must be positive");
  check_arg(!data.empty(), "gibbs_sweep: empty data");
  const double log_alpha = std::log(alpha);
  const auto empty = model.empty_stats();
  std::vector<double> logw;
  for (std::size_t n = 0; n < data.size(); ++n) {
    int c = state.assign[n];
    model.remove(state.clusters[c], data[n]);
    --state.sizes[c];
    state.log_data -= model.log_predictive(data[n], state.clusters[c]);
    if (state.sizes[c] == 0) detail::erase_cluster(state, c);

    const std::size_t k = state.clusters.size();
    logw.assign(k + 1, 0.0);
    for (std::size_t d = 0; d < k; ++d) {
      logw[d] = std::log(static_cast<double>(state.sizes[d])) +
                model.log_predictive(data[n], state.clusters[d]);
    }
    logw[k] = log_alpha + model.log_predictive(data[n], empty);
    const int chosen = rng.categorical_from_logits(logw);

    if (chosen == static_cast<int>(k)) {
      state.clusters.push_back(empty);
      state.sizes.push_back(0);
    }
    state.log_data += model.log_predictive(data[n], state.clusters[chosen]);
    model.add(state.clusters[chosen], data[n]);
    ++state.sizes[chosen];
    state.assign[n] = chosen;
  }
  detail::canonicalize_chain(state);
}

struct SplitMergeReport {
  bool proposed_merge = false;
  double log_ratio = 0.0;  // log MH acceptance ratio (before min with 0)
  bool accepted = false;
};

template <class Model>
SplitMergeReport split_merge_step(const Model& model,
                                  const std::vector<typename Model::Datum>& data, double alpha,
                                  ChainState<Model>& state, Rng& rng,
                                  int restricted_scans = 5) {
  const std::size_t n = data.size();
  check_arg(n >= 2, "split_merge_step: need at least two points");
  check_arg(restricted_scans >= 0, "split_merge_step: restricted_scans must be >= 0");

  const int i = static_cast<int>(rng.below(n));
  int j = static_cast<int>(rng.below(n - 1));
  if (j >= i) ++j;
  const int ci = state.assign[i];
  const int cj = state.assign[j];

  // Members of the affected cluster(s) other than the anchors, ascending.
  std::vector<int> others;
  for (std::size_t p = 0; p < n; ++p) {
    const int c = state.assign[p];
    if ((c == ci || c == cj) && static_cast<int>(p) != i && static_cast<int>(p) != j)
      others.push_back(static_cast<int>(p));
  }

  // Two-cluster launch machinery. side[p] is true when p sits with anchor i.
  auto stats_i = model.empty_stats();
  auto stats_j = model.empty_stats();
  model.add(stats_i, data[i]);
  model.add(stats_j, data[j]);
  std::int64_t n_i = 1, n_j = 1;
  std::vector<char> side(others.size(), 0);

  auto add_to = [&](bool to_i, int p) {
    if (to_i) { model.add(stats_i, data[p]); ++n_i; }
    else { model.add(stats_j, data[p]); ++n_j; }
  };
  auto remove_from = [&](bool from_i, int p) {
    if (from_i) { model.remove(stats_i, data[p]); --n_i; }
    else { model.remove(stats_j, data[p]); --n_j; }
  };

  // One restricted sweep over the non-anchor members.
  //   mode 0: sample (launch refinement)
  //   mode 1: sample and accumulate the transition probability (proposal draw)
  //   mode 2: force each point to `target` and accumulate the probability
  auto restricted_sweep = [&](int mode, const std::vector<char>* target) {
    double log_q = 0.0;
    for (std::size_t idx = 0; idx < others.size(); ++idx) {
      const int p = others[idx];
      remove_from(side[idx], p);
      const double lw_i = std::log(static_cast<double>(n_i)) +
                          model.log_predictive(data[p], stats_i);
      const double lw_j = std::log(static_cast<double>(n_j)) +
                          model.log_predictive(data[p], stats_j);
      const double norm = log_add(lw_i, lw_j);
      bool to_i;
      if (mode == 2) {
        to_i = (*target)[idx] != 0;
        log_q += (to_i ? lw_i : lw_j) - norm;
      } else {
        to_i = rng.uniform01() < std::exp(lw_i - norm);
        if (mode == 1) log_q += (to_i ? lw_i : lw_j) - norm;
      }
      side[idx] = to_i ? 1 : 0;
      add_to(to_i, p);
    }
    return log_q;
  };

  auto build_launch = [&]() {
    for (std::size_t idx = 0; idx < others.size(); ++idx) {
      const bool to_i = rng.below(2) == 0;
      side[idx] = to_i ? 1 : 0;
      add_to(to_i, others[idx]);
    }
    for (int s = 0; s < restricted_scans; ++s) restricted_sweep(0, nullptr);
  };

  // Acceptance ratios must use the probability of the specific set partition
  // (the seating prior), not the size-multiset marginal: the chain moves
  // between individual partitions, and only the former makes the kernel
  // reversible with respect to the partition posterior. For a split this
  // contributes the familiar alpha * (n_i-1)!(n_j-1)! / (n-1)! factor.
  const double prior_cur =
      log_prob_partition(MVector::from_sizes(state.sizes), alpha);
  SplitMergeReport report;

  if (ci == cj) {
    // ----- split proposal -----
    build_launch();
    const double log_q_fwd = restricted_sweep(1, nullptr);

    std::vector<int> part_i{i}, part_j{j};
    for (std::size_t idx = 0; idx < others.size(); ++idx)
      (side[idx] ? part_i : part_j).push_back(others[idx]);
    std::sort(part_i.begin(), part_i.end());
    std::sort(part_j.begin(), part_j.end());

    std::vector<int> whole = part_i;
    whole.insert(whole.end(), part_j.begin(), part_j.end());
    std::sort(whole.begin(), whole.end());

    const double data_cur = detail::member_marginal(model, data, whole);
    const double data_prop = detail::member_marginal(model, data, part_i) +
                             detail::member_marginal(model, data, part_j);

    std::vector<std::int64_t> sizes_prop = state.sizes;
    sizes_prop[ci] = static_cast<std::int64_t>(part_i.size());
    sizes_prop.push_back(static_cast<std::int64_t>(part_j.size()));
    const double prior_prop =
        log_prob_partition(MVector::from_sizes(sizes_prop), alpha);

    // Reverse move (merge) is deterministic: its transition probability is 1.
    report.log_ratio = (data_prop + prior_prop) - (data_cur + prior_cur) - log_q_fwd;
    report.accepted =
        report.log_ratio >= 0.0 || rng.uniform01() < std::exp(report.log_ratio);
    if (report.accepted) {
      const int fresh = static_cast<int>(state.clusters.size());
      for (int p : part_j) state.assign[p] = fresh;
      state.clusters[ci] = stats_i;
      state.sizes[ci] = static_cast<std::int64_t>(part_i.size());
      state.clusters.push_back(stats_j);
      state.sizes.push_back(static_cast<std::int64_t>(part_j.size()));
      state.log_data += data_prop - data_cur;
    }
  } else {
    // ----- merge proposal -----
    report.proposed_merge = true;
    std::vector<int> part_i, part_j;
    for (std::size_t p = 0; p < n; ++p) {
      if (state.assign[p] == ci) part_i.push_back(static_cast<int>(p));
      if (state.assign[p] == cj) part_j.push_back(static_cast<int>(p));
    }
    std::vector<int> whole = part_i;
    whole.insert(whole.end(), part_j.begin(), part_j.end());
    std::sort(whole.begin(), whole.end());

    const double data_cur = detail::member_marginal(model, data, part_i) +
                            detail::member_marginal(model, data, part_j);
    const double data_prop = detail::member_marginal(model, data, whole);

    std::vector<std::int64_t> sizes_prop;
    for (std::size_t c = 0; c < state.sizes.size(); ++c) {
      if (static_cast<int>(c) == ci) continue;
      sizes_prop.push_back(static_cast<int>(c) == cj
                               ? static_cast<std::int64_t>(whole.size())
                               : state.sizes[c]);
    }
    const double prior_prop =
        log_prob_partition(MVector::from_sizes(sizes_prop), alpha);

    // Reverse move: a split launched from the merged cluster with the same
    // anchors must land exactly on the current split. Replay the launch
    // procedure, then force the final sweep to the current assignment.
    std::vector<char> target(others.size());
    for (std::size_t idx = 0; idx < others.size(); ++idx)
      target[idx] = state.assign[others[idx]] == ci ? 1 : 0;
    build_launch();
    const double log_q_rev = restricted_sweep(2, &target);

    report.log_ratio = (data_prop + prior_prop) - (data_cur + prior_cur) + log_q_rev;
    report.accepted =
        report.log_ratio >= 0.0 || rng.uniform01() < std::exp(report.log_ratio);
    if (report.accepted) {
      auto merged = model.empty_stats();
      for (int p : whole) model.add(merged, data[p]);
      for (int p : part_i) state.assign[p] = cj;
      state.clusters[cj] = std::move(merged);
      state.sizes[cj] = static_cast<std::int64_t>(whole.size());
      state.sizes[ci] = 0;
      detail::erase_cluster(state, ci);
      state.log_data += data_prop - data_cur;
    }
  }
  detail::canonicalize_chain(state);
  return report;
}

// ---------------------------------------------------------------------------
// Repeated-restart protocol.
// ---------------------------------------------------------------------------

enum class SamplerKind { kGibbs, kSplitMerge };
enum class InitKind { kSingle, kSeparate, kRandom, kProtocol };

struct RunRecord {
  int run_index = 0;
  InitKind init = InitKind::kSingle;
  std::uint64_t seed = 0;
  double best_log_joint = kNegInf;
  std::vector<int> best_assignment;
  std::int64_t best_iteration = 0;  // 0 = the initial state
  double time_to_best_ms = 0.0;
  double wall_time_ms = 0.0;
  double final_log_joint = kNegInf;
  std::vector<double> trace;  // log joint after each iteration (size = iters)
};

struct ProtocolResult {
  std::vector<RunRecord> runs;
  int best_run = 0;  // argmax best_log_joint, earliest on ties
};

// Initial assignment for one run. kRandom uses ceil(log2 N) labels (at least
// one) sampled uniformly per point.
inline std::vector<int> protocol_init(std::size_t n, InitKind kind, Rng& rng) {
  check_arg(kind != InitKind::kProtocol, "protocol_init: resolve kProtocol per run first");
  std::vector<int> assign(n, 0);
  if (kind == InitKind::kSeparate) {
    for (std::size_t i = 0; i < n; ++i) assign[i] = static_cast<int>(i);
  } else if (kind == InitKind::kRandom) {
    const int k = std::max(1, ceil_log2(static_cast<std::int64_t>(n)));
    for (std::size_t i = 0; i < n; ++i)
      assign[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  }
  return assign;
}

template <class Model>
ProtocolResult run_protocol(const Model& model, const std::vector<typename Model::Datum>& data,
                            double alpha, SamplerKind sampler, std::int64_t iters, int runs,
                            InitKind init, std::uint64_t seed, int restricted_scans = 5) {
  check_arg(!data.empty(), "run_protocol: empty data");
  check_arg(iters >= 0, "run_protocol: iters must be >= 0");
  check_arg(runs >= 1, "run_protocol: runs must be >= 1");
  ProtocolResult out;
  out.runs.reserve(runs);

  // kProtocol splits the runs into three blocks: single-cluster inits, then
  // all-singleton inits, then random inits (5/5/5 at the default 15 runs).
  const int base = runs / 3;
  const int extra = runs % 3;
  const int g0 = base + (extra > 0 ? 1 : 0);
  const int g1 = base + (extra > 1 ? 1 : 0);
  auto init_of_run = [&](int r) {
    if (init != InitKind::kProtocol) return init;
    if (r < g0) return InitKind::kSingle;
    if (r < g0 + g1) return InitKind::kSeparate;
    return InitKind::kRandom;
  };

  for (int r = 0; r < runs; ++r) {
    const auto run_t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.run_index = r;
    rec.init = init_of_run(r);
    rec.seed = derive_seed(seed, static_cast<std::uint64_t>(r));
    Rng rng(rec.seed);

    auto state = make_chain_state(model, data, protocol_init(data.size(), rec.init, rng));
    auto consider = [&](std::int64_t iteration) {
      const double lj = chain_log_joint(state, alpha);
      if (lj > rec.best_log_joint) {
        rec.best_log_joint = lj;
        rec.best_assignment = state.assign;
        rec.best_iteration = iteration;
        rec.time_to_best_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - run_t0)
                                  .count();
      }
      return lj;
    };
    consider(0);

    double last = kNegInf;
    rec.trace.reserve(static_cast<std::size_t>(iters));
    for (std::int64_t it = 1; it <= iters; ++it) {
      if (sampler == SamplerKind::kSplitMerge && data.size() >= 2) {
        split_merge_step(model, data, alpha, state, rng, restricted_scans);
      }
      gibbs_sweep(model, data, alpha, state, rng);
      last = consider(it);
      rec.trace.push_back(last);
    }
    rec.final_log_joint = iters == 0 ? chain_log_joint(state, alpha) : last;
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - run_t0)
                           .count();
    out.runs.push_back(std::move(rec));
  }

  for (std::size_t r = 1; r < out.runs.size(); ++r) {
    if (out.runs[r].best_log_joint > out.runs[out.best_run].best_log_joint)
      out.best_run = static_cast<int>(r);
  }
  return out;
}

}  // namespace dpmix
