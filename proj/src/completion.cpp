#include "dpmix/completion.hpp"

#include <cmath>
#include <cstring>

namespace dpmix {

std::optional<double> CompletionMemo::get(const std::string& key) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);  // mark most recent
  return it->second->second;
}

void CompletionMemo::put(const std::string& key, double value) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it != map_.end()) {
    it->second->second = value;
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, value);
  map_[key] = order_.begin();
  while (map_.size() > capacity_) {
    map_.erase(order_.back().first);
    order_.pop_back();
  }
}

std::size_t CompletionMemo::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

CompletionMemo& CompletionMemo::global() {
  static CompletionMemo memo;
  return memo;
}

namespace {

std::string memo_key(const MVector& m0, std::int64_t n_target, double alpha) {
  std::string key = m0.canonical_key();
  key.append(reinterpret_cast<const char*>(&n_target), sizeof(n_target));
  key.append(reinterpret_cast<const char*>(&alpha), sizeof(alpha));
  return key;
}

}  // namespace

double max_completion_log_prob(const MVector& m0, std::int64_t n_target, double alpha,
                               CompletionMemo* memo, bool accelerate) {
  check_arg(alpha > 0.0, "max_completion_log_prob: alpha must be positive");
  const std::int64_t n0 = m0.total_points();
  check_arg(n_target >= n0, "max_completion_log_prob: n_target below current point count");
  if (n_target == n0) return log_prob_m(m0, alpha);

  if (memo == nullptr) memo = &CompletionMemo::global();
  const std::string key = memo_key(m0, n_target, alpha);
  if (auto hit = memo->get(key)) return *hit;

  MVector m = m0;
  std::int64_t rem = n_target - n0;
  while (rem > 0) {
    // Per-point argmax over {new cluster} U {grow a cluster of size s}.
    // Scanning sizes in ascending order with >= implements the tie policy:
    // any grow beats "new" on ties, and larger sizes beat smaller ones.
    double best_delta = delta_log_new(m, alpha);
    std::int64_t best_size = 0;  // 0 encodes "new cluster"
    for (const auto& [size, count] : m.entries()) {
      (void)count;
      double d = delta_log_grow(m, size);
      if (d >= best_delta) {
        best_delta = d;
        best_size = size;
      }
    }

    if (best_size == 0) {
      m.add_new_cluster();
      --rem;
      continue;
    }

    // If we just grew the unique largest cluster, every bucket below it is
    // frozen for as long as the chain keeps growing that cluster, so all
    // competitor deltas stay constant while the chain's own delta
    // log(s/(s+1)) increases. Once the chain's next delta already beats all
    // competitors (ties go to the top grow), every remaining point joins it.
    const bool top_chain = accelerate && best_size == m.largest_size() &&
                           m.count_of(best_size) == 1;
    m.grow(best_size);
    --rem;

    if (top_chain && rem > 0) {
      const std::int64_t top = best_size + 1;
      const double g_future = std::log(static_cast<double>(top)) -
                              std::log(static_cast<double>(top + 1));
      double competitor = delta_log_new(m, alpha);
      for (const auto& [size, count] : m.entries()) {
        (void)count;
        if (size == top) continue;
        competitor = std::max(competitor, delta_log_grow(m, size));
      }
      if (g_future >= competitor) {
        std::vector<MVector::Entry> entries;
        for (const auto& e : m.entries()) {
          if (e.first == top) {
            check_logic(e.second == 1, "max_completion_log_prob: top chain not unique");
            entries.emplace_back(top + rem, 1);
          } else {
            entries.push_back(e);
          }
        }
        m = MVector::from_entries(std::move(entries));
        rem = 0;
      }
    }
  }

  const double out = log_prob_m(m, alpha);
  memo->put(key, out);
  return out;
}

}  // namespace dpmix
