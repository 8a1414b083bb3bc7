#include "dpmix/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

namespace dpmix {

MVector MVector::from_entries(std::vector<Entry> entries) {
  MVector m;
  std::sort(entries.begin(), entries.end());
  for (const auto& [size, count] : entries) {
    check_arg(size >= 1, "MVector: cluster sizes must be >= 1");
    check_arg(count >= 0, "MVector: counts must be >= 0");
    if (count == 0) continue;
    if (!m.e_.empty() && m.e_.back().first == size) {
      m.e_.back().second += count;
    } else {
      m.e_.emplace_back(size, count);
    }
  }
  return m;
}

MVector MVector::from_assignment(const std::vector<int>& assign) {
  std::unordered_map<int, std::int64_t> sizes;
  for (int label : assign) ++sizes[label];
  std::vector<std::int64_t> s;
  s.reserve(sizes.size());
  for (const auto& [label, n] : sizes) s.push_back(n);
  return from_sizes(s);
}

MVector MVector::from_sizes(const std::vector<std::int64_t>& sizes) {
  std::vector<Entry> entries;
  entries.reserve(sizes.size());
  for (std::int64_t s : sizes) entries.emplace_back(s, 1);
  return from_entries(std::move(entries));
}

std::int64_t MVector::total_points() const {
  std::int64_t n = 0;
  for (const auto& [size, count] : e_) n += size * count;
  return n;
}

std::int64_t MVector::num_clusters() const {
  std::int64_t k = 0;
  for (const auto& [size, count] : e_) k += count;
  return k;
}

std::int64_t MVector::count_of(std::int64_t size) const {
  for (const auto& [s, c] : e_) {
    if (s == size) return c;
    if (s > size) break;
  }
  return 0;
}

std::int64_t MVector::largest_size() const { return e_.empty() ? 0 : e_.back().first; }

void MVector::insert_count(std::int64_t size, std::int64_t delta) {
  auto it = std::lower_bound(e_.begin(), e_.end(), size,
                             [](const Entry& e, std::int64_t s) { return e.first < s; });
  if (it != e_.end() && it->first == size) {
    it->second += delta;
    check_logic(it->second >= 0, "MVector: negative count");
    if (it->second == 0) e_.erase(it);
  } else {
    check_logic(delta >= 0, "MVector: decrement of absent size");
    if (delta > 0) e_.insert(it, Entry{size, delta});
  }
}

void MVector::add_new_cluster() { insert_count(1, 1); }

void MVector::grow(std::int64_t size) {
  check_arg(size >= 1, "MVector::grow: size must be >= 1");
  check_arg(count_of(size) >= 1, "MVector::grow: no cluster of the given size");
  insert_count(size, -1);
  insert_count(size + 1, 1);
}

std::string MVector::canonical_key() const {
  std::string key;
  key.resize(e_.size() * 2 * sizeof(std::int64_t));
  char* p = key.data();
  for (const auto& [size, count] : e_) {
    std::memcpy(p, &size, sizeof(size));
    p += sizeof(size);
    std::memcpy(p, &count, sizeof(count));
    p += sizeof(count);
  }
  return key;
}

double log_prob_m(const MVector& m, double alpha) {
  check_arg(alpha > 0.0, "log_prob_m: alpha must be positive");
  const std::int64_t n = m.total_points();
  if (n == 0) return 0.0;
  const std::int64_t k = m.num_clusters();
  double lp = std::lgamma(static_cast<double>(n) + 1.0);
  lp -= std::lgamma(alpha + static_cast<double>(n)) - std::lgamma(alpha);  // rising factorial
  lp += static_cast<double>(k) * std::log(alpha);
  for (const auto& [size, count] : m.entries()) {
    lp -= static_cast<double>(count) * std::log(static_cast<double>(size));
    lp -= std::lgamma(static_cast<double>(count) + 1.0);
  }
  return lp;
}

double log_partition_count(const MVector& m) {
  const std::int64_t n = m.total_points();
  if (n == 0) return 0.0;
  double lc = std::lgamma(static_cast<double>(n) + 1.0);
  for (const auto& [size, count] : m.entries()) {
    lc -= static_cast<double>(count) * std::lgamma(static_cast<double>(size) + 1.0);
    lc -= std::lgamma(static_cast<double>(count) + 1.0);
  }
  return lc;
}

double log_prob_partition(const MVector& m, double alpha) {
  check_arg(alpha > 0.0, "log_prob_partition: alpha must be positive");
  const std::int64_t n = m.total_points();
  if (n == 0) return 0.0;
  double lp = static_cast<double>(m.num_clusters()) * std::log(alpha);
  lp -= std::lgamma(alpha + static_cast<double>(n)) - std::lgamma(alpha);
  for (const auto& [size, count] : m.entries())
    lp += static_cast<double>(count) * std::lgamma(static_cast<double>(size));
  return lp;
}

double delta_log_new(const MVector& m, double alpha) {
  check_arg(alpha > 0.0, "delta_log_new: alpha must be positive");
  return std::log(alpha) - std::log(static_cast<double>(m.count_of(1) + 1));
}

double delta_log_grow(const MVector& m, std::int64_t size) {
  check_arg(size >= 1, "delta_log_grow: size must be >= 1");
  const std::int64_t ms = m.count_of(size);
  check_arg(ms >= 1, "delta_log_grow: no cluster of the given size");
  return std::log(static_cast<double>(size)) - std::log(static_cast<double>(size + 1)) +
         std::log(static_cast<double>(ms)) -
         std::log(static_cast<double>(m.count_of(size + 1) + 1));
}

}  // namespace dpmix
