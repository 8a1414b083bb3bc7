#pragma once
// Synthetic data generation and file formats.
//
// Formats:
//   dense-csv        one row per point, comma-separated decimal values
//   sparse-triplet   one line per entry: "doc_id term_id count", all 0-based;
//                    doc count = max doc_id + 1
//   labels           one integer per line (cluster truth / predictions)
//
// Generators draw a partition from the sequential Chinese-restaurant process,
// then cluster parameters from the prior, then observations.

#include <cstdint>
#include <string>
#include <vector>

#include "dpmix/models.hpp"
#include "dpmix/rng.hpp"

namespace dpmix {

struct GaussianData {
  std::vector<GaussianModel::Datum> points;
  std::vector<int> truth;
};

struct DcmData {
  std::vector<DcmModel::Datum> docs;
  int vocab = 0;
  std::vector<int> truth;
};

// Sequential CRP partition with canonical labels: point i joins an existing
// cluster with probability size/(alpha+i) or starts a new one w.p. alpha/(alpha+i).
std::vector<int> crp_partition(std::int64_t n, double alpha, Rng& rng);

// theta_c ~ N(0, prior_var I); x | theta_c ~ N(theta_c, obs_var I).
GaussianData generate_gaussian_data(std::int64_t n, int dim, double alpha, double prior_var,
                                    double obs_var, Rng& rng);

// phi_c ~ Dirichlet(lambda); doc length uniform on [len_min, len_max]; tokens
// i.i.d. from phi_c.
DcmData generate_dcm_data(std::int64_t n, int vocab, double alpha, double lambda, Rng& rng,
                          int len_min = 5, int len_max = 15);

// ---- file I/O; parse errors name the 1-based line number ----

void save_dense_csv(const std::string& path, const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> load_dense_csv(const std::string& path);

void save_sparse_triplets(const std::string& path, const std::vector<DcmModel::Datum>& docs);
// vocab_hint 0 derives the vocabulary as max term id + 1; a positive hint is
// validated against the file's term ids.
std::vector<DcmModel::Datum> load_sparse_triplets(const std::string& path, int vocab_hint,
                                                  int* vocab_out);

void save_labels(const std::string& path, const std::vector<int>& labels);
std::vector<int> load_labels(const std::string& path);

// Conventional sidecar path for ground-truth labels next to a data file.
inline std::string truth_path_for(const std::string& data_path) {
  return data_path + ".truth";
}

}  // namespace dpmix
