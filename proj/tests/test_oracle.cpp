#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "dpmix/dataset.hpp"
#include "dpmix/models.hpp"
#include "dpmix/oracle.hpp"
#include "dpmix/rng.hpp"
#include "test_util.hpp"

using namespace dpmix;

namespace {

std::vector<GaussianModel::Datum> random_points(int n, int dim, Rng& rng, double scale = 3.0) {
  std::vector<GaussianModel::Datum> pts;
  for (int i = 0; i < n; ++i) {
    GaussianModel::Datum x(dim);
    for (double& v : x) v = rng.normal() * scale;
    pts.push_back(std::move(x));
  }
  return pts;
}

// Scratch recomputation of the joint: data term by per-cluster sequential
// predictives plus the size-multiset prior.
template <class Model>
double scratch_log_joint(const Model& model, const std::vector<typename Model::Datum>& data,
                         const std::vector<int>& assign, double alpha) {
  std::map<int, typename Model::Stats> stats;
  double log_data = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = stats.try_emplace(assign[i], model.empty_stats()).first;
    log_data += model.log_predictive(data[i], it->second);
    model.add(it->second, data[i]);
  }
  return log_data + log_prob_m(MVector::from_assignment(assign), alpha);
}

}  // namespace

TEST_CASE("partition enumeration visits each set partition exactly once") {
  const auto bell = testutil::bell_numbers(10);
  GaussianModel model(1, 10.0, 1.0);
  Rng rng(11);
  for (int n = 1; n <= 10; ++n) {
    const auto data = random_points(n, 1, rng);
    long long count = 0;
    std::map<std::vector<int>, int> seen;
    for_each_partition(model, data,
                       [&](const std::vector<int>& assign, double, const auto&) {
                         ++count;
                         ++seen[assign];
                       });
    CHECK(count == bell[n]);
    CHECK(static_cast<long long>(seen.size()) == count);  // no duplicates
    for (const auto& [assign, c] : seen) {
      CHECK(c == 1);
      CHECK(assign == canonicalize_assignment(assign));  // restricted growth form
    }
  }
}

TEST_CASE("enumeration's incremental data term matches scratch recomputation") {
  GaussianModel model(2, 10.0, 1.0);
  Rng rng(21);
  const auto data = random_points(7, 2, rng);
  for_each_partition(model, data,
                     [&](const std::vector<int>& assign, double log_data, const auto& sizes) {
                       double scratch = scratch_log_joint(model, data, assign, 1.0) -
                                        log_prob_m(MVector::from_assignment(assign), 1.0);
                       CHECK(std::abs(log_data - scratch) < 1e-10);
                       std::int64_t total = 0;
                       for (auto s : sizes) total += s;
                       CHECK(total == static_cast<std::int64_t>(assign.size()));
                     });
}

TEST_CASE("log_joint equals data term plus size-multiset prior") {
  GaussianModel model(2, 10.0, 1.0);
  Rng rng(31);
  const auto data = random_points(9, 2, rng);
  const std::vector<std::vector<int>> assigns = {
      {0, 0, 0, 0, 0, 0, 0, 0, 0},
      {0, 1, 2, 3, 4, 5, 6, 7, 8},
      {0, 1, 0, 1, 0, 1, 0, 1, 0},
      {0, 0, 1, 1, 2, 2, 3, 3, 3},
  };
  for (const auto& a : assigns) {
    CHECK(log_joint(model, data, a, 1.0) ==
          doctest::Approx(scratch_log_joint(model, data, a, 1.0)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(log_joint(model, data, {0, 1}, 1.0), std::invalid_argument);
}

TEST_CASE("exhaustive MAP maximizes over the enumeration, ties to lexicographic order") {
  GaussianModel model(2, 10.0, 1.0);
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 5 + trial;
    const auto data = random_points(n, 2, rng);
    const PartitionResult res = exhaustive_map(model, data, 1.0);
    double best = kNegInf;
    std::vector<int> best_assign;
    for_each_partition(model, data,
                       [&](const std::vector<int>& assign, double log_data, const auto&) {
                         const double lj =
                             log_data + log_prob_m(MVector::from_assignment(assign), 1.0);
                         if (lj > best) {
                           best = lj;
                           best_assign = assign;
                         }
                       });
    CHECK(res.log_joint == doctest::Approx(best).epsilon(1e-13));
    CHECK(res.assignment == best_assign);
  }
  CHECK_THROWS_AS(exhaustive_map(model, random_points(13, 2, rng), 1.0, 12),
                  std::invalid_argument);
}

TEST_CASE("posterior enumeration is normalized and proportional to the seating joint") {
  GaussianModel model(1, 10.0, 1.0);
  Rng rng(51);
  const auto data = random_points(6, 1, rng);
  const auto post = enumerate_posterior(model, data, 0.7);
  double total = 0.0;
  for (const auto& e : post) total += std::exp(e.log_prob);
  CHECK(std::abs(total - 1.0) < 1e-10);
  // Each entry's log_joint matches the standalone objective, and probability
  // ratios follow the seating-prior joint: objective ratio minus the ratio of
  // partition counts for the two size multisets.
  auto seating_joint = [&](const PosteriorEntry& e) {
    const MVector m = MVector::from_assignment(e.assignment);
    return e.log_joint - log_prob_m(m, 0.7) + log_prob_partition(m, 0.7);
  };
  const double ls0 = seating_joint(post[0]);
  for (std::size_t i = 0; i < post.size(); ++i) {
    CHECK(post[i].log_joint ==
          doctest::Approx(log_joint(model, data, post[i].assignment, 0.7)).epsilon(1e-12));
    if (i == 0) continue;
    const double lsi = seating_joint(post[i]);
    CHECK(std::abs((post[i].log_prob - post[0].log_prob) - (lsi - ls0)) < 1e-9);
  }
  // The best entry by log_joint is the exhaustive MAP optimum.
  double best = kNegInf;
  for (const auto& e : post) best = std::max(best, e.log_joint);
  CHECK(best == doctest::Approx(exhaustive_map(model, data, 0.7).log_joint).epsilon(1e-13));
}

TEST_CASE("posterior grouped by size multiset recovers the multiset prior when data is flat") {
  // A model whose predictive is constant makes the posterior equal the prior
  // over partitions. Summing entry probabilities over all partitions that
  // share a size multiset must then reproduce the multiset prior exactly.
  struct FlatModel {
    using Datum = int;
    struct Stats {
      std::int64_t n = 0;
    };
    Stats empty_stats() const { return {}; }
    void add(Stats& s, const Datum&) const { ++s.n; }
    void remove(Stats& s, const Datum&) const { --s.n; }
    double log_predictive(const Datum&, const Stats&) const { return 0.0; }
  };
  FlatModel model;
  for (const double alpha : {0.5, 1.0, 2.3}) {
    for (int n = 2; n <= 7; ++n) {
      const std::vector<int> data(static_cast<std::size_t>(n), 0);
      const auto post = enumerate_posterior(model, data, alpha);
      std::map<std::string, double> by_m;
      std::map<std::string, double> want;
      for (const auto& e : post) {
        const MVector m = MVector::from_assignment(e.assignment);
        by_m[m.canonical_key()] += std::exp(e.log_prob);
        want[m.canonical_key()] = std::exp(log_prob_m(m, alpha));
      }
      for (const auto& [key, mass] : by_m)
        CHECK(std::abs(mass - want[key]) < 1e-10);
    }
  }
}

TEST_CASE("partition count: multiset class sizes against direct enumeration") {
  // exp(log_partition_count(m)) must equal the number of set partitions whose
  // size multiset is m, for every m arising at each N.
  for (int n = 1; n <= 9; ++n) {
    std::map<std::string, std::int64_t> counts;
    std::map<std::string, MVector> reps;
    std::int64_t total = 0;
    testutil::for_each_rgs(n, [&](const std::vector<int>& assign) {
      const MVector m = MVector::from_assignment(assign);
      ++counts[m.canonical_key()];
      reps.emplace(m.canonical_key(), m);
      ++total;
    });
    CHECK(total == testutil::bell_numbers(n).back());
    for (const auto& [key, count] : counts) {
      const double got = std::exp(log_partition_count(reps.at(key)));
      CHECK(got == doctest::Approx(static_cast<double>(count)).epsilon(1e-10));
    }
  }
  CHECK(log_partition_count(MVector()) == 0.0);
}

TEST_CASE("seating prior: sums to one over partitions and matches incremental seating") {
  // Sum over all set partitions of exp(log_prob_partition) is exactly one.
  for (const double alpha : {0.5, 1.0, 2.0}) {
    for (int n = 1; n <= 8; ++n) {
      double total = 0.0;
      testutil::for_each_rgs(n, [&](const std::vector<int>& assign) {
        total += std::exp(log_prob_partition(MVector::from_assignment(assign), alpha));
      });
      CHECK(std::abs(total - 1.0) < 1e-10);
    }
  }
  // Per-partition value equals the product of sequential seating choices.
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = std::exp(rng.uniform01() * 2.0 - 1.0);
    const auto assign = crp_partition(2 + static_cast<std::int64_t>(rng.below(9)), alpha, rng);
    const double got = log_prob_partition(MVector::from_assignment(assign), alpha);
    const double want = testutil::crp_partition_log_prob(assign, alpha);
    CHECK(got == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("best completion of a prefix agrees with enumeration over suffixes") {
  GaussianModel model(1, 10.0, 1.0);
  Rng rng(61);
  const auto data = random_points(6, 1, rng);
  // For each prefix assignment, the best completion must equal the max joint
  // over all full partitions extending it.
  const std::vector<std::vector<int>> prefixes = {{0}, {0, 0}, {0, 1}, {0, 0, 1}, {0, 1, 2}};
  for (const auto& prefix : prefixes) {
    const double got = best_completion_log_joint(model, data, 1.0, prefix);
    double want = kNegInf;
    for_each_partition(model, data,
                       [&](const std::vector<int>& assign, double log_data, const auto&) {
                         for (std::size_t i = 0; i < prefix.size(); ++i)
                           if (assign[i] != prefix[i]) return;
                         want = std::max(
                             want, log_data + log_prob_m(MVector::from_assignment(assign), 1.0));
                       });
    CHECK(got == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("pairwise scores: frozen examples and conventions") {
  // Prediction keeps one of three true pairs and predicts nothing false:
  // precision 1, recall 1/3.
  const PairwiseScores s = pairwise_scores({1, 1, 2}, {1, 1, 1});
  CHECK(s.precision == doctest::Approx(1.0));
  CHECK(s.recall == doctest::Approx(1.0 / 3.0));
  CHECK(s.fscore_geometric == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
  CHECK(s.fscore_harmonic == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pairwise_fscore({1, 1, 2}, {1, 1, 1}) == s.fscore_geometric);

  // Perfect agreement up to relabeling.
  const PairwiseScores p = pairwise_scores({0, 1, 0, 2}, {5, 3, 5, 9});
  CHECK(p.precision == 1.0);
  CHECK(p.recall == 1.0);
  CHECK(p.fscore_geometric == 1.0);

  // No predicted pairs (all singletons): precision 1 by convention.
  const PairwiseScores q = pairwise_scores({0, 1, 2}, {0, 0, 0});
  CHECK(q.precision == 1.0);
  CHECK(q.recall == 0.0);
  CHECK(q.fscore_geometric == 0.0);

  // No true pairs: recall 1 by convention.
  const PairwiseScores r = pairwise_scores({0, 0, 0}, {0, 1, 2});
  CHECK(r.recall == 1.0);
  CHECK(r.precision == 0.0);

  // Both all-singletons: vacuous agreement.
  const PairwiseScores v = pairwise_scores({0, 1, 2}, {3, 4, 5});
  CHECK(v.precision == 1.0);
  CHECK(v.recall == 1.0);
  CHECK(v.fscore_geometric == 1.0);

  CHECK_THROWS_AS(pairwise_scores({0, 1}, {0, 1, 2}), std::invalid_argument);
}

TEST_CASE("pairwise precision and recall are transposes") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(10));
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.below(4));
      b[i] = static_cast<int>(rng.below(4));
    }
    const PairwiseScores ab = pairwise_scores(a, b);
    const PairwiseScores ba = pairwise_scores(b, a);
    CHECK(ab.precision == doctest::Approx(ba.recall).epsilon(1e-14));
    CHECK(ab.recall == doctest::Approx(ba.precision).epsilon(1e-14));
    CHECK(ab.fscore_geometric == doctest::Approx(ba.fscore_geometric).epsilon(1e-14));
  }
}

TEST_CASE("oracles work for the multinomial family too") {
  DcmModel model(4, 1.0);
  Rng rng(81);
  DcmData d = generate_dcm_data(6, 4, 1.0, 1.0, rng);
  const PartitionResult res = exhaustive_map(model, d.docs, 1.0);
  double best = kNegInf;
  for_each_partition(model, d.docs,
                     [&](const std::vector<int>& assign, double log_data, const auto&) {
                       best = std::max(
                           best, log_data + log_prob_m(MVector::from_assignment(assign), 1.0));
                     });
  CHECK(res.log_joint == doctest::Approx(best).epsilon(1e-12));
  CHECK(std::abs(scratch_log_joint(model, d.docs, res.assignment, 1.0) - res.log_joint) <
        1e-10);
}
