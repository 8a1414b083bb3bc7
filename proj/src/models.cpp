#include "dpmix/models.hpp"

#include <algorithm>
#include <cmath>

namespace dpmix {

// ---------------------------------------------------------------------------
// GaussianModel
// ---------------------------------------------------------------------------

GaussianModel::GaussianModel(int dim, double prior_var, double obs_var,
                             std::vector<double> prior_mean)
    : dim_(dim), prior_var_(prior_var), obs_var_(obs_var), prior_mean_(std::move(prior_mean)) {
  check_arg(dim_ >= 1, "GaussianModel: dim must be >= 1");
  check_arg(prior_var_ > 0.0, "GaussianModel: prior_var must be positive");
  check_arg(obs_var_ > 0.0, "GaussianModel: obs_var must be positive");
  if (prior_mean_.empty()) prior_mean_.assign(dim_, 0.0);
  check_arg(static_cast<int>(prior_mean_.size()) == dim_,
            "GaussianModel: prior_mean dimension mismatch");
  w0_ = obs_var_ / prior_var_;
}

void GaussianModel::validate_datum(const Datum& x) const {
  check_arg(static_cast<int>(x.size()) == dim_, "GaussianModel: datum dimension mismatch");
}

void GaussianModel::add(Stats& s, const Datum& x) const {
  validate_datum(x);
  check_logic(static_cast<int>(s.sum.size()) == dim_, "GaussianModel: stats dimension mismatch");
  ++s.n;
  for (int d = 0; d < dim_; ++d) s.sum[d] += x[d];
}

void GaussianModel::remove(Stats& s, const Datum& x) const {
  validate_datum(x);
  check_logic(s.n >= 1, "GaussianModel: remove from empty stats");
  --s.n;
  for (int d = 0; d < dim_; ++d) s.sum[d] -= x[d];
}

double GaussianModel::log_predictive(const Datum& x, const Stats& s) const {
  const double denom = w0_ + static_cast<double>(s.n);
  const double pred_var = obs_var_ / denom + obs_var_;
  double lp = 0.0;
  for (int d = 0; d < dim_; ++d) {
    const double mu = (prior_mean_[d] * w0_ + s.sum[d]) / denom;
    const double diff = x[d] - mu;
    lp += -0.5 * (kLog2Pi + std::log(pred_var)) - diff * diff / (2.0 * pred_var);
  }
  return lp;
}

double GaussianModel::datum_norm(const Datum& x) const {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return std::sqrt(sq);
}

double GaussianModel::saturated_predictive(const Datum& x, const Stats& s,
                                           std::int64_t max_replicas, double norm_cap) const {
  validate_datum(x);
  check_arg(max_replicas >= 0, "saturated_predictive: max_replicas must be >= 0");
  check_arg(norm_cap >= 0.0, "saturated_predictive: norm_cap must be >= 0");

  // Candidate j = 0 is exactly the plain predictive, making the bound tight
  // at zero replicas and nondecreasing in max_replicas by construction.
  double best = log_predictive(x, s);
  if (max_replicas == 0) return best;

  // Adding j points with norms <= norm_cap shifts the cluster's summed
  // observations by any vector t with |t| <= j * norm_cap. For a fixed j the
  // predictive mean can therefore be moved to the closest point of the ball
  // of radius j*norm_cap/denom around (c0 + 0)/denom, giving the exact
  // supremum in closed form:
  //   denom_j = w0 + n + j,  pred_var_j = obs_var/denom_j + obs_var,
  //   gap_j = max(0, |denom_j * x - c0| - j*norm_cap) / denom_j,
  //   value_j = -D/2 * log(2*pi*pred_var_j) - gap_j^2 / (2*pred_var_j).
  const double xnorm = datum_norm(x);
  for (std::int64_t j = 1; j <= max_replicas; ++j) {
    const double denom = w0_ + static_cast<double>(s.n) + static_cast<double>(j);
    const double pred_var = obs_var_ / denom + obs_var_;
    double gsq = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double c0 = prior_mean_[d] * w0_ + s.sum[d];
      const double diff = denom * x[d] - c0;
      gsq += diff * diff;
    }
    const double gap =
        std::max(0.0, std::sqrt(gsq) - static_cast<double>(j) * norm_cap) / denom;
    const double value = -0.5 * static_cast<double>(dim_) * (kLog2Pi + std::log(pred_var)) -
                         gap * gap / (2.0 * pred_var);
    best = std::max(best, value);
    if (gap == 0.0 && xnorm <= norm_cap) {
      // The mean has reached x and stays reachable for every larger j (each
      // extra replica can contribute up to norm_cap >= |x| of drift), while
      // the predictive variance keeps shrinking: the supremum over the
      // remaining counts is at j = max_replicas with zero gap.
      const double denom_k = w0_ + static_cast<double>(s.n) + static_cast<double>(max_replicas);
      const double pred_var_k = obs_var_ / denom_k + obs_var_;
      const double value_k =
          -0.5 * static_cast<double>(dim_) * (kLog2Pi + std::log(pred_var_k));
      return std::max(best, value_k);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// DcmModel
// ---------------------------------------------------------------------------

DcmModel::DcmModel(int vocab, double lambda) : vocab_(vocab), lambda_(lambda) {
  check_arg(vocab_ >= 1, "DcmModel: vocab must be >= 1");
  check_arg(lambda_ > 0.0, "DcmModel: lambda must be positive");
}

void DcmModel::validate_datum(const Datum& x) const {
  std::int32_t prev = -1;
  for (const auto& [term, count] : x) {
    check_arg(term >= 0 && term < vocab_, "DcmModel: term id out of range");
    check_arg(term > prev, "DcmModel: term ids must be strictly increasing");
    check_arg(count > 0.0, "DcmModel: counts must be positive");
    prev = term;
  }
}

void DcmModel::add(Stats& s, const Datum& x) const {
  validate_datum(x);
  check_logic(static_cast<int>(s.counts.size()) == vocab_, "DcmModel: stats size mismatch");
  ++s.n;
  for (const auto& [term, count] : x) {
    s.counts[term] += count;
    s.tokens += count;
  }
}

void DcmModel::remove(Stats& s, const Datum& x) const {
  validate_datum(x);
  check_logic(s.n >= 1, "DcmModel: remove from empty stats");
  --s.n;
  for (const auto& [term, count] : x) {
    s.counts[term] -= count;
    s.tokens -= count;
  }
}

double DcmModel::log_predictive(const Datum& x, const Stats& s) const {
  const double a_total = static_cast<double>(vocab_) * lambda_ + s.tokens;
  double length = 0.0;
  double lp = 0.0;
  for (const auto& [term, count] : x) {
    const double c = lambda_ + s.counts[term];
    lp += std::lgamma(c + count) - std::lgamma(c);
    length += count;
  }
  lp += std::lgamma(a_total) - std::lgamma(a_total + length);
  return lp;
}

double DcmModel::datum_norm(const Datum& x) const {
  double total = 0.0;
  for (const auto& [term, count] : x) total += count;
  return total;
}

namespace detail {

double digamma(double x) {
  check_arg(x > 0.0, "digamma: argument must be positive");
  double r = 0.0;
  while (x < 10.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  // Asymptotic series with Bernoulli-number coefficients.
  const double series =
      f * (1.0 / 12.0 -
           f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (1.0 / 240.0 - f * (1.0 / 132.0)))));
  return r + std::log(x) - 0.5 / x - series;
}

namespace {

bool near_integer(double v) { return std::abs(v - std::llround(v)) < 1e-9 && v < 1e6; }

// d/da [ lgamma(c + a + x) - lgamma(c + a) ]; harmonic partial sum for
// integer x, digamma difference otherwise. Decreasing in a.
double gain_slope(double c, double x, double a) {
  if (near_integer(x)) {
    const std::int64_t xi = std::llround(x);
    double s = 0.0;
    for (std::int64_t r = 0; r < xi; ++r) s += 1.0 / (c + a + static_cast<double>(r));
    return s;
  }
  return digamma(c + a + x) - digamma(c + a);
}

double gain_value(double c, double x, double a) {
  return std::lgamma(c + a + x) - std::lgamma(c + a);
}

// Solves gain_slope(c, x, a) == mu for a >= 0 (slope decreasing in a).
// Returns 0 when the slope at zero is already <= mu.
double alloc_for_slope(double c, double x, double mu) {
  if (gain_slope(c, x, 0.0) <= mu) return 0.0;
  // gain_slope(a) <= x / (c + a), so the root lies below x/mu - c (+ margin).
  double hi = std::max(1.0, x / mu - c + 1.0);
  while (gain_slope(c, x, hi) > mu) hi *= 2.0;  // safety; rarely taken
  double lo = 0.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gain_slope(c, x, mid) > mu) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace
}  // namespace detail

double DcmModel::saturated_predictive(const Datum& x, const Stats& s, std::int64_t max_replicas,
                                      double norm_cap) const {
  validate_datum(x);
  check_arg(max_replicas >= 0, "saturated_predictive: max_replicas must be >= 0");
  check_arg(norm_cap >= 0.0, "saturated_predictive: norm_cap must be >= 0");

  const double base = log_predictive(x, s);
  const double cap = static_cast<double>(max_replicas) * norm_cap;
  if (max_replicas == 0 || cap <= 0.0 || x.empty()) return base;

  // Relaxation: any added documents (at most max_replicas of them, each with
  // at most norm_cap tokens) contribute a nonnegative mass a_v per term, with
  // total mass M = sum_v a_v <= cap. Mass on terms outside x's support only
  // inflates the normalizer, so the supremum places all mass on the support:
  //
  //   value(M) = sum_v [lgamma(c_v + a_v + x_v) - lgamma(c_v + a_v)]
  //            - [lgamma(A + M + L) - lgamma(A + M)],
  //
  // maximized over the waterfilling allocation (equal marginal slopes mu).
  // value has at most one interior critical point in M (slopes are strictly
  // monotone), so the max over [0, cap] is attained at M = 0, M = cap, or the
  // unique M* where the allocation slope mu equals the normalizer slope.
  const double a_total = static_cast<double>(vocab_) * lambda_ + s.tokens;
  double length = 0.0;
  for (const auto& [term, count] : x) length += count;

  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = lambda_ + s.counts[x[i].first];

  auto total_alloc = [&](double mu, std::vector<double>* out) {
    double m_total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double a = detail::alloc_for_slope(c[i], x[i].second, mu);
      if (out) (*out)[i] = a;
      m_total += a;
    }
    return m_total;
  };
  auto normalizer_slope = [&](double m_total) {
    return detail::gain_slope(a_total, length, m_total);
  };
  auto value_at = [&](const std::vector<double>& alloc, double m_total) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      v += detail::gain_value(c[i] + alloc[i], x[i].second, 0.0);
    v -= detail::gain_value(a_total + m_total, length, 0.0);
    return v;
  };

  double best = base;  // the M = 0 candidate
  std::vector<double> alloc(x.size(), 0.0);

  // Candidate M = cap: waterfill at the fixed total (total_alloc decreasing in mu).
  {
    double mu_hi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      mu_hi = std::max(mu_hi, detail::gain_slope(c[i], x[i].second, 0.0));
    if (total_alloc(mu_hi, nullptr) >= cap) {
      // Even the smallest allocations exceed cap only in degenerate cases;
      // spread the cap proportionally to stay feasible.
      const double per = cap / static_cast<double>(x.size());
      std::fill(alloc.begin(), alloc.end(), per);
      best = std::max(best, value_at(alloc, cap));
    } else {
      double lo = 1e-300, hi = mu_hi;
      if (total_alloc(lo, nullptr) >= cap) {
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (total_alloc(mid, nullptr) >= cap) lo = mid; else hi = mid;
        }
        const double m_total = total_alloc(0.5 * (lo + hi), &alloc);
        best = std::max(best, value_at(alloc, std::min(m_total, cap)));
      }
      // else: unbounded allocations never reach cap numerically; interior
      // candidate below covers the optimum.
    }
  }

  // Interior candidate: mu with mu == normalizer_slope(total_alloc(mu));
  // g(mu) = mu - normalizer_slope(total_alloc(mu)) is strictly increasing.
  {
    double mu_hi = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      mu_hi = std::max(mu_hi, detail::gain_slope(c[i], x[i].second, 0.0));
    auto g = [&](double mu) { return mu - normalizer_slope(total_alloc(mu, nullptr)); };
    if (g(mu_hi) > 0.0) {
      double lo = mu_hi, hi = mu_hi;
      bool bracketed = false;
      for (int it = 0; it < 120; ++it) {
        lo *= 0.5;
        if (total_alloc(lo, nullptr) >= cap) break;  // optimum beyond cap
        if (g(lo) <= 0.0) { bracketed = true; break; }
        hi = lo;
      }
      if (bracketed) {
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (g(mid) <= 0.0) lo = mid; else hi = mid;
        }
        const double m_star = total_alloc(0.5 * (lo + hi), &alloc);
        if (m_star > 0.0 && m_star <= cap) best = std::max(best, value_at(alloc, m_star));
      }
    }
  }

  return best;
}

}  // namespace dpmix
