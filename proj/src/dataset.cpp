#include "dpmix/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "dpmix/common.hpp"

namespace dpmix {

std::vector<int> crp_partition(std::int64_t n, double alpha, Rng& rng) {
  check_arg(n >= 0, "crp_partition: n must be >= 0");
  check_arg(alpha > 0.0, "crp_partition: alpha must be positive");
  std::vector<int> assign;
  assign.reserve(n);
  std::vector<std::int64_t> sizes;
  for (std::int64_t i = 0; i < n; ++i) {
    const double total = alpha + static_cast<double>(i);
    const double r = rng.uniform01() * total;
    double cum = 0.0;
    int chosen = static_cast<int>(sizes.size());
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      cum += static_cast<double>(sizes[c]);
      if (r < cum) {
        chosen = static_cast<int>(c);
        break;
      }
    }
    if (chosen == static_cast<int>(sizes.size())) sizes.push_back(0);
    ++sizes[chosen];
    assign.push_back(chosen);
  }
  return assign;
}

GaussianData generate_gaussian_data(std::int64_t n, int dim, double alpha, double prior_var,
                                    double obs_var, Rng& rng) {
  check_arg(n >= 1, "generate_gaussian_data: n must be >= 1");
  check_arg(dim >= 1, "generate_gaussian_data: dim must be >= 1");
  check_arg(prior_var > 0.0 && obs_var > 0.0,
            "generate_gaussian_data: variances must be positive");
  GaussianData out;
  out.truth = crp_partition(n, alpha, rng);
  const double prior_sd = std::sqrt(prior_var);
  const double obs_sd = std::sqrt(obs_var);
  std::vector<std::vector<double>> means;
  out.points.reserve(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const int c = out.truth[i];
    while (static_cast<int>(means.size()) <= c) {
      std::vector<double> theta(dim);
      for (double& t : theta) t = prior_sd * rng.normal();
      means.push_back(std::move(theta));
    }
    std::vector<double> x(dim);
    for (int d = 0; d < dim; ++d) x[d] = means[c][d] + obs_sd * rng.normal();
    out.points.push_back(std::move(x));
  }
  return out;
}

DcmData generate_dcm_data(std::int64_t n, int vocab, double alpha, double lambda, Rng& rng,
                          int len_min, int len_max) {
  check_arg(n >= 1, "generate_dcm_data: n must be >= 1");
  check_arg(vocab >= 1, "generate_dcm_data: vocab must be >= 1");
  check_arg(lambda > 0.0, "generate_dcm_data: lambda must be positive");
  check_arg(len_min >= 1 && len_max >= len_min, "generate_dcm_data: bad length range");
  DcmData out;
  out.vocab = vocab;
  out.truth = crp_partition(n, alpha, rng);
  std::vector<std::vector<double>> topics;
  out.docs.reserve(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const int c = out.truth[i];
    while (static_cast<int>(topics.size()) <= c)
      topics.push_back(rng.dirichlet(static_cast<std::size_t>(vocab), lambda));
    const auto& phi = topics[c];
    const int length =
        len_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(len_max - len_min + 1)));
    std::map<std::int32_t, double> counts;
    for (int t = 0; t < length; ++t) {
      const double r = rng.uniform01();
      double cum = 0.0;
      std::int32_t term = vocab - 1;
      for (int v = 0; v < vocab; ++v) {
        cum += phi[v];
        if (r < cum) {
          term = v;
          break;
        }
      }
      counts[term] += 1.0;
    }
    DcmModel::Datum doc(counts.begin(), counts.end());
    out.docs.push_back(std::move(doc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  check_arg(in.good(), "cannot open file for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  check_arg(out.good(), "cannot open file for writing: " + path);
  return out;
}

[[noreturn]] void line_error(const std::string& path, std::size_t line_no,
                             const std::string& what) {
  throw std::invalid_argument(path + ": line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& tok, const std::string& path, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    line_error(path, line_no, "invalid number '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, const std::string& path, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    line_error(path, line_no, "invalid integer '" + tok + "'");
  return v;
}

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void save_dense_csv(const std::string& path, const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  out.precision(17);
  for (const auto& row : rows) {
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d) out << ',';
      out << row[d];
    }
    out << '\n';
  }
  check_arg(out.good(), "write failed: " + path);
}

std::vector<std::vector<double>> load_dense_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trimmed(line);
    if (t.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const std::string tt = trimmed(tok);
      if (tt.empty()) line_error(path, line_no, "empty field");
      row.push_back(parse_double(tt, path, line_no));
    }
    if (row.empty()) line_error(path, line_no, "empty row");
    if (!rows.empty() && row.size() != rows.front().size())
      line_error(path, line_no,
                 "row has " + std::to_string(row.size()) + " fields, expected " +
                     std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  check_arg(!rows.empty(), path + ": no data rows");
  return rows;
}

void save_sparse_triplets(const std::string& path, const std::vector<DcmModel::Datum>& docs) {
  auto out = open_out(path);
  out.precision(17);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& [term, count] : docs[d]) out << d << ' ' << term << ' ' << count << '\n';
  }
  check_arg(out.good(), "write failed: " + path);
}

std::vector<DcmModel::Datum> load_sparse_triplets(const std::string& path, int vocab_hint,
                                                  int* vocab_out) {
  check_arg(vocab_hint >= 0, "load_sparse_triplets: vocab_hint must be >= 0");
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  long long max_doc = -1, max_term = -1;
  std::vector<std::map<std::int32_t, double>> docs;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trimmed(line);
    if (t.empty()) continue;
    std::stringstream ss(t);
    std::string a, b, c, extra;
    if (!(ss >> a >> b >> c)) line_error(path, line_no, "expected 'doc term count'");
    if (ss >> extra) line_error(path, line_no, "trailing field '" + extra + "'");
    const long long doc = parse_int(a, path, line_no);
    const long long term = parse_int(b, path, line_no);
    const double count = parse_double(c, path, line_no);
    if (doc < 0) line_error(path, line_no, "doc_id must be >= 0");
    if (term < 0) line_error(path, line_no, "term_id must be >= 0");
    if (vocab_hint > 0 && term >= vocab_hint)
      line_error(path, line_no, "term_id " + std::to_string(term) + " outside vocab " +
                                    std::to_string(vocab_hint));
    if (count <= 0.0) line_error(path, line_no, "count must be positive");
    max_doc = std::max(max_doc, doc);
    max_term = std::max(max_term, term);
    if (static_cast<std::size_t>(doc) >= docs.size()) docs.resize(doc + 1);
    docs[doc][static_cast<std::int32_t>(term)] += count;
  }
  check_arg(max_doc >= 0, path + ": no data rows");
  std::vector<DcmModel::Datum> out;
  out.reserve(docs.size());
  for (auto& m : docs) out.emplace_back(m.begin(), m.end());
  if (vocab_out) *vocab_out = vocab_hint > 0 ? vocab_hint : static_cast<int>(max_term + 1);
  return out;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int l : labels) out << l << '\n';
  check_arg(out.good(), "write failed: " + path);
}

std::vector<int> load_labels(const std::string& path) {
  auto in = open_in(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trimmed(line);
    if (t.empty()) continue;
    labels.push_back(static_cast<int>(parse_int(t, path, line_no)));
  }
  check_arg(!labels.empty(), path + ": no labels");
  return labels;
}

}  // namespace dpmix
