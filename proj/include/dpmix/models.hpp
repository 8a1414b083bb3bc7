#pragma once
// Conjugate observation models.
//
// Each model exposes the same surface:
//   Datum            — one observation
//   Stats            — sufficient statistics of a cluster (exact add/remove)
//   log_predictive   — log H(x | S), the posterior predictive of x given the
//                      cluster's current members, with parameters integrated out
//   saturated_predictive
//                    — an upper bound on log H(x | S ∪ R) over every multiset R
//                      of at most `max_replicas` points whose norms do not
//                      exceed `norm_cap` (the search uses the dataset-wide
//                      maximum norm); equals log_predictive at max_replicas = 0
//                      and is nondecreasing in max_replicas
//   datum_norm       — the norm used for `norm_cap` (L2 for Gaussian, L1 token
//                      count for the Dirichlet/multinomial model)
//
// Algorithms (search, samplers, oracles) are templates over this surface.

#include <cstdint>
#include <utility>
#include <vector>

#include "dpmix/common.hpp"

namespace dpmix {

// Gaussian observations with a Gaussian prior on the cluster mean, isotropic:
//   theta ~ N(prior_mean, prior_var * I),  x | theta ~ N(theta, obs_var * I).
// Predictive per dimension d: N(x_d; mu_d, v + obs_var) with
//   w0 = obs_var / prior_var, mu_d = (prior_mean_d * w0 + sum_d) / (w0 + n),
//   v = obs_var / (w0 + n).
class GaussianModel {
 public:
  using Datum = std::vector<double>;
  struct Stats {
    std::int64_t n = 0;
    std::vector<double> sum;
  };

  GaussianModel(int dim, double prior_var, double obs_var,
                std::vector<double> prior_mean = {});

  int dim() const { return dim_; }
  double prior_var() const { return prior_var_; }
  double obs_var() const { return obs_var_; }

  Stats empty_stats() const { return Stats{0, std::vector<double>(dim_, 0.0)}; }
  void add(Stats& s, const Datum& x) const;
  void remove(Stats& s, const Datum& x) const;
  double log_predictive(const Datum& x, const Stats& s) const;
  double datum_norm(const Datum& x) const;  // L2
  double saturated_predictive(const Datum& x, const Stats& s, std::int64_t max_replicas,
                              double norm_cap) const;
  void validate_datum(const Datum& x) const;

 private:
  int dim_;
  double prior_var_;
  double obs_var_;
  std::vector<double> prior_mean_;
  double w0_;  // obs_var / prior_var
};

// Multinomial token counts with a symmetric Dirichlet prior on the topic:
//   phi ~ Dirichlet(lambda, ..., lambda) over `vocab` terms,
//   document x = per-term counts (no multinomial coefficient in H).
// log H(x | S) = lgamma(A) - lgamma(A + L)
//              + sum_v [lgamma(lambda + s_v + x_v) - lgamma(lambda + s_v)],
// where A = vocab * lambda + (tokens in S) and L = tokens in x.
class DcmModel {
 public:
  // Sparse counts: (term id, count), term ids strictly increasing, counts > 0.
  using Datum = std::vector<std::pair<std::int32_t, double>>;
  struct Stats {
    std::int64_t n = 0;
    double tokens = 0.0;
    std::vector<double> counts;
  };

  DcmModel(int vocab, double lambda);

  int vocab() const { return vocab_; }
  double lambda() const { return lambda_; }

  Stats empty_stats() const { return Stats{0, 0.0, std::vector<double>(vocab_, 0.0)}; }
  void add(Stats& s, const Datum& x) const;
  void remove(Stats& s, const Datum& x) const;
  double log_predictive(const Datum& x, const Stats& s) const;
  double datum_norm(const Datum& x) const;  // L1 (token count)
  double saturated_predictive(const Datum& x, const Stats& s, std::int64_t max_replicas,
                              double norm_cap) const;
  void validate_datum(const Datum& x) const;

 private:
  int vocab_;
  double lambda_;
};

namespace detail {
// digamma for positive arguments (recurrence to x >= 10, then the asymptotic
// series); used only for non-integer token counts.
double digamma(double x);
}  // namespace detail

}  // namespace dpmix
