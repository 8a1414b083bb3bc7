// dpmix: command-line front end for the clustering library.
//
// Subcommands:
//   generate    synthesize a dataset (+ ground-truth label sidecar)
//   cluster     best-first search for the MAP partition
//   exact       exhaustive enumeration (small N)
//   gibbs       collapsed Gibbs sampler under the restart protocol
//   splitmerge  split-merge sampler under the restart protocol
//   eval        pairwise precision/recall/F-score between two labelings
//   bench       the full benchmark matrix (CSV to stdout or --out)
//
// Exit codes: 0 success, 1 usage/input error, 2 internal error.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpmix/bench.hpp"
#include "dpmix/common.hpp"
#include "dpmix/dataset.hpp"
#include "dpmix/mcmc.hpp"
#include "dpmix/models.hpp"
#include "dpmix/oracle.hpp"
#include "dpmix/search.hpp"

using nlohmann::json;
using namespace dpmix;

namespace {

struct CommonOpts {
  std::string model = "gauss";
  double alpha = 1.0;
  int dim = 2;
  double prior_var = 10.0;
  double obs_var = 1.0;
  int vocab = 0;  // 0: derive from data file
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::string data;
  std::string format;  // empty: derived from model
  std::string out;     // empty: stdout
};

void add_model_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--model", o.model, "Observation model: gauss | dcm")
      ->check(CLI::IsMember({"gauss", "dcm"}));
  cmd->add_option("--alpha", o.alpha, "Concentration parameter (> 0)");
  cmd->add_option("--dim", o.dim, "Gaussian dimensionality");
  cmd->add_option("--prior-var", o.prior_var, "Gaussian prior variance on cluster means");
  cmd->add_option("--obs-var", o.obs_var, "Gaussian observation variance");
  cmd->add_option("--vocab", o.vocab, "DCM vocabulary size (0 = derive from data)");
  cmd->add_option("--lambda", o.lambda, "DCM symmetric Dirichlet concentration");
  cmd->add_option("--seed", o.seed, "RNG seed");
}

std::string effective_format(const CommonOpts& o) {
  if (!o.format.empty()) return o.format;
  return o.model == "gauss" ? "dense-csv" : "sparse-triplet";
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  check_arg(out.good(), "cannot open file for writing: " + out_path);
  out << text;
  check_arg(out.good(), "write failed: " + out_path);
}

json assignment_json(const std::vector<int>& assign) {
  json a = json::array();
  for (int v : assign) a.push_back(v);
  return a;
}

int num_clusters_of(const std::vector<int>& assign) {
  int k = 0;
  for (int v : assign) k = std::max(k, v + 1);
  return k;
}

// ---------------------------------------------------------------------------
// Data loading, dispatched on the model family.
// ---------------------------------------------------------------------------

struct LoadedGauss {
  GaussianModel model;
  std::vector<GaussianModel::Datum> data;
};

struct LoadedDcm {
  DcmModel model;
  std::vector<DcmModel::Datum> data;
};

LoadedGauss load_gauss(const CommonOpts& o) {
  check_arg(!o.data.empty(), "--data is required");
  check_arg(effective_format(o) == "dense-csv", "gauss expects --format dense-csv");
  auto rows = load_dense_csv(o.data);
  const int dim = static_cast<int>(rows.front().size());
  return {GaussianModel(dim, o.prior_var, o.obs_var), std::move(rows)};
}

LoadedDcm load_dcm(const CommonOpts& o) {
  check_arg(!o.data.empty(), "--data is required");
  check_arg(effective_format(o) == "sparse-triplet", "dcm expects --format sparse-triplet");
  int vocab = 0;
  auto docs = load_sparse_triplets(o.data, o.vocab, &vocab);
  return {DcmModel(vocab, o.lambda), std::move(docs)};
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateOpts {
  CommonOpts common;
  std::int64_t n = 50;
  int len_min = 5;
  int len_max = 15;
};

int cmd_generate(const GenerateOpts& g) {
  const CommonOpts& o = g.common;
  check_arg(!o.out.empty(), "generate requires --out");
  if (o.model == "gauss") {
    Rng rng(o.seed);
    GaussianData d =
        generate_gaussian_data(g.n, o.dim, o.alpha, o.prior_var, o.obs_var, rng);
    save_dense_csv(o.out, d.points);
    save_labels(truth_path_for(o.out), d.truth);
    json doc = {{"model", "gauss"},       {"n", g.n},
                {"dim", o.dim},           {"alpha", o.alpha},
                {"data", o.out},          {"truth", truth_path_for(o.out)},
                {"num_clusters", num_clusters_of(d.truth)}};
    std::cout << doc.dump() << '\n';
  } else {
    const int vocab = o.vocab > 0 ? o.vocab : 20;
    Rng rng(o.seed);
    DcmData d = generate_dcm_data(g.n, vocab, o.alpha, o.lambda, rng, g.len_min, g.len_max);
    save_sparse_triplets(o.out, d.docs);
    save_labels(truth_path_for(o.out), d.truth);
    json doc = {{"model", "dcm"},         {"n", g.n},
                {"vocab", vocab},         {"alpha", o.alpha},
                {"data", o.out},          {"truth", truth_path_for(o.out)},
                {"num_clusters", num_clusters_of(d.truth)}};
    std::cout << doc.dump() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// cluster / exact
// ---------------------------------------------------------------------------

struct ClusterOpts {
  CommonOpts common;
  std::string scorer = "inadmissible";
  std::string beam = "100";
  std::string order = "asc";
  std::int64_t max_enqueued = 0;
};

template <class Model>
int run_cluster(const Model& model, const std::vector<typename Model::Datum>& data,
                const ClusterOpts& c) {
  SearchOptions opt;
  if (c.scorer == "trivial")
    opt.scorer = Scorer::kTrivial;
  else if (c.scorer == "admissible")
    opt.scorer = Scorer::kAdmissible;
  else if (c.scorer == "inadmissible")
    opt.scorer = Scorer::kInadmissible;
  else
    check_arg(false, "unknown --scorer '" + c.scorer + "'");
  if (c.beam == "inf")
    opt.beam = 0;
  else {
    try {
      opt.beam = std::stoll(c.beam);
    } catch (const std::exception&) {
      check_arg(false, "--beam expects an integer or 'inf'");
    }
    check_arg(opt.beam >= 1, "--beam must be >= 1 (or 'inf')");
  }
  if (c.order == "asc")
    opt.order = DataOrder::kAscending;
  else if (c.order == "desc")
    opt.order = DataOrder::kDescending;
  else if (c.order == "given")
    opt.order = DataOrder::kGiven;
  else if (c.order == "random")
    opt.order = DataOrder::kRandom;
  else
    check_arg(false, "unknown --order '" + c.order + "'");
  opt.seed = c.common.seed;
  opt.max_enqueued = c.max_enqueued;

  SearchResult res = dpsearch(model, data, c.common.alpha, opt);
  json doc = {{"algorithm", "search"},
              {"config",
               {{"scorer", c.scorer},
                {"beam", c.beam == "inf" ? json(nullptr) : json(opt.beam)},
                {"order", c.order},
                {"alpha", c.common.alpha}}},
              {"aborted", res.aborted},
              {"log_joint", res.log_joint},
              {"num_clusters", num_clusters_of(res.assignment)},
              {"assignment", assignment_json(res.assignment)},
              {"enqueued", res.enqueued},
              {"dequeued", res.dequeued},
              {"wall_time_ms", res.wall_time_ms},
              {"seed", c.common.seed},
              {"order_permutation", assignment_json(res.order)}};
  write_text(c.common.out, doc.dump() + "\n");
  return 0;
}

template <class Model>
int run_exact(const Model& model, const std::vector<typename Model::Datum>& data,
              const CommonOpts& o) {
  PartitionResult res = exhaustive_map(model, data, o.alpha);
  json doc = {{"algorithm", "exact"},
              {"config", {{"alpha", o.alpha}}},
              {"log_joint", res.log_joint},
              {"num_clusters", num_clusters_of(res.assignment)},
              {"assignment", assignment_json(res.assignment)}};
  write_text(o.out, doc.dump() + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// gibbs / splitmerge
// ---------------------------------------------------------------------------

struct SamplerOpts {
  CommonOpts common;
  std::int64_t iters = 1000;  // restart protocol: 15 runs of 1000 iterations
  int runs = 15;
  std::string init = "protocol";
  int restricted_scans = 5;
};

const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::kSingle: return "single";
    case InitKind::kSeparate: return "separate";
    case InitKind::kRandom: return "random";
    case InitKind::kProtocol: return "protocol";
  }
  return "?";
}

template <class Model>
int run_sampler(const Model& model, const std::vector<typename Model::Datum>& data,
                const SamplerOpts& s, SamplerKind kind) {
  InitKind init;
  if (s.init == "single")
    init = InitKind::kSingle;
  else if (s.init == "separate")
    init = InitKind::kSeparate;
  else if (s.init == "random")
    init = InitKind::kRandom;
  else if (s.init == "protocol")
    init = InitKind::kProtocol;
  else {
    check_arg(false, "unknown --init '" + s.init + "'");
    return 1;  // unreachable
  }
  ProtocolResult pr = run_protocol(model, data, s.common.alpha, kind, s.iters, s.runs, init,
                                   s.common.seed, s.restricted_scans);
  const char* algo = kind == SamplerKind::kGibbs ? "gibbs" : "splitmerge";
  std::ostringstream lines;
  for (const RunRecord& r : pr.runs) {
    json doc = {{"algorithm", algo},
                {"run_index", r.run_index},
                {"init", init_name(r.init)},
                {"seed", r.seed},
                {"best_log_joint", r.best_log_joint},
                {"best_iteration", r.best_iteration},
                {"num_clusters", num_clusters_of(r.best_assignment)},
                {"assignment", assignment_json(r.best_assignment)},
                {"time_to_best_ms", r.time_to_best_ms},
                {"wall_time_ms", r.wall_time_ms},
                {"final_log_joint", r.final_log_joint}};
    lines << doc.dump() << '\n';
  }
  const RunRecord& best = pr.runs.at(pr.best_run);
  json summary = {{"algorithm", algo},
                  {"summary", true},
                  {"config",
                   {{"iters", s.iters},
                    {"runs", s.runs},
                    {"init", s.init},
                    {"restricted_scans", s.restricted_scans},
                    {"alpha", s.common.alpha}}},
                  {"seed", s.common.seed},
                  {"best_run", pr.best_run},
                  {"log_joint", best.best_log_joint},
                  {"num_clusters", num_clusters_of(best.best_assignment)},
                  {"assignment", assignment_json(best.best_assignment)}};
  lines << summary.dump() << '\n';
  write_text(s.common.out, lines.str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

// A labeling argument is either a plain label file (one integer per line) or
// a JSON document with an "assignment" array — detected by the first
// non-space byte being '{'.
std::vector<int> load_labeling(const std::string& path) {
  std::ifstream in(path);
  check_arg(in.good(), "cannot open file for reading: " + path);
  char c = 0;
  while (in.get(c) && (c == ' ' || c == '\t' || c == '\r' || c == '\n')) {
  }
  if (c != '{') return load_labels(path);
  in.clear();
  in.seekg(0);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": invalid JSON: " + e.what());
  }
  check_arg(doc.contains("assignment") && doc["assignment"].is_array(),
            path + ": JSON document has no \"assignment\" array");
  std::vector<int> labels;
  for (const auto& v : doc["assignment"]) {
    check_arg(v.is_number_integer(), path + ": non-integer label in \"assignment\"");
    labels.push_back(v.get<int>());
  }
  check_arg(!labels.empty(), path + ": empty \"assignment\"");
  return labels;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& out_path) {
  const std::vector<int> pred = load_labeling(pred_path);
  const std::vector<int> truth = load_labeling(truth_path);
  PairwiseScores s = pairwise_scores(pred, truth);
  json doc = {{"fscore", s.fscore_geometric},
              {"fscore_harmonic", s.fscore_harmonic},
              {"precision", s.precision},
              {"recall", s.recall}};
  write_text(out_path, doc.dump() + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOpts {
  BenchConfig config;
  std::string sizes_csv;
  std::string out;
  std::string summary_out;
};

int cmd_bench(BenchOpts& b) {
  if (!b.sizes_csv.empty()) {
    b.config.sizes.clear();
    std::stringstream ss(b.sizes_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        b.config.sizes.push_back(std::stoll(tok));
      } catch (const std::exception&) {
        check_arg(false, "--sizes expects a comma-separated integer list");
      }
    }
    check_arg(!b.config.sizes.empty(), "--sizes expects a comma-separated integer list");
  }
  BenchResult res = run_benchmark(b.config);
  write_text(b.out, bench_rows_csv(res));
  if (!b.summary_out.empty())
    write_text(b.summary_out, bench_summary_csv(res));
  else if (!b.out.empty())  // rows went to a file; show the aggregate on stdout
    std::cout << bench_summary_csv(res);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP clustering for Dirichlet-process mixtures: best-first search, "
               "exhaustive enumeration, and MCMC baselines"};
  app.require_subcommand(1);

  GenerateOpts gen;
  CLI::App* c_gen = app.add_subcommand("generate", "Synthesize a dataset with truth labels");
  add_model_flags(c_gen, gen.common);
  c_gen->add_option("--n", gen.n, "Number of points/documents")->required();
  c_gen->add_option("--len-min", gen.len_min, "DCM minimum document length");
  c_gen->add_option("--len-max", gen.len_max, "DCM maximum document length");
  c_gen->add_option("--out", gen.common.out, "Output data path")->required();

  ClusterOpts clu;
  CLI::App* c_clu = app.add_subcommand("cluster", "Search for the MAP partition");
  add_model_flags(c_clu, clu.common);
  c_clu->add_option("--data", clu.common.data, "Input data path")->required();
  c_clu->add_option("--format", clu.common.format, "dense-csv | sparse-triplet")
      ->check(CLI::IsMember({"dense-csv", "sparse-triplet"}));
  c_clu->add_option("--scorer", clu.scorer, "trivial | admissible | inadmissible");
  c_clu->add_option("--beam", clu.beam, "Beam width (integer) or 'inf'");
  c_clu->add_option("--order", clu.order, "asc | desc | given | random");
  c_clu->add_option("--max-enqueued", clu.max_enqueued, "Abort budget (0 = unlimited)");
  c_clu->add_option("--out", clu.common.out, "Write the result JSON here (default stdout)");

  CommonOpts exa;
  CLI::App* c_exa = app.add_subcommand("exact", "Exhaustively enumerate partitions (small N)");
  add_model_flags(c_exa, exa);
  c_exa->add_option("--data", exa.data, "Input data path")->required();
  c_exa->add_option("--format", exa.format, "dense-csv | sparse-triplet")
      ->check(CLI::IsMember({"dense-csv", "sparse-triplet"}));
  c_exa->add_option("--out", exa.out, "Write the result JSON here (default stdout)");

  SamplerOpts gib;
  CLI::App* c_gib = app.add_subcommand("gibbs", "Collapsed Gibbs sampler (restart protocol)");
  SamplerOpts spm;
  CLI::App* c_spm =
      app.add_subcommand("splitmerge", "Split-merge sampler (restart protocol)");
  for (auto [cmd, opts] : {std::pair{c_gib, &gib}, std::pair{c_spm, &spm}}) {
    add_model_flags(cmd, opts->common);
    cmd->add_option("--data", opts->common.data, "Input data path")->required();
    cmd->add_option("--format", opts->common.format, "dense-csv | sparse-triplet")
        ->check(CLI::IsMember({"dense-csv", "sparse-triplet"}));
    cmd->add_option("--iters", opts->iters, "Iterations per run");
    cmd->add_option("--runs", opts->runs, "Number of restart-protocol runs");
    cmd->add_option("--init", opts->init, "single | separate | random | protocol");
    cmd->add_option("--restricted-scans", opts->restricted_scans,
                    "Refinement sweeps while building split-merge launch states");
    cmd->add_option("--out", opts->common.out, "Write NDJSON here (default stdout)");
  }

  std::string eval_pred, eval_truth, eval_out;
  CLI::App* c_eval = app.add_subcommand("eval", "Pairwise scores between two labelings");
  c_eval->add_option("--pred", eval_pred, "Predicted labels (label file or result JSON)")
      ->required();
  c_eval->add_option("--truth", eval_truth, "Reference labels (label file or result JSON)")
      ->required();
  c_eval->add_option("--out", eval_out, "Write the score JSON here (default stdout)");

  BenchOpts ben;
  CLI::App* c_ben = app.add_subcommand("bench", "Run the benchmark matrix, emit CSV");
  c_ben->add_option("--sizes", ben.sizes_csv, "Comma-separated dataset sizes");
  c_ben->add_option("--seeds-per-size", ben.config.seeds_per_size, "Datasets per size");
  c_ben->add_option("--alpha", ben.config.alpha, "Concentration parameter");
  c_ben->add_option("--dim", ben.config.dim, "Gaussian dimensionality");
  c_ben->add_option("--prior-var", ben.config.prior_var, "Prior variance");
  c_ben->add_option("--obs-var", ben.config.obs_var, "Observation variance");
  c_ben->add_option("--iters", ben.config.sampler_iters, "Sampler iterations per run");
  c_ben->add_option("--runs", ben.config.sampler_runs, "Sampler runs per dataset");
  c_ben->add_option("--enqueue-budget", ben.config.enqueue_budget,
                    "Search abort budget (0 = unlimited)");
  c_ben->add_option("--threads", ben.config.threads, "Worker threads (0 = hardware)");
  c_ben->add_option("--seed", ben.config.seed, "Master seed");
  c_ben->add_option("--out", ben.out, "Write the row CSV here (default stdout)");
  c_ben->add_option("--summary-out", ben.summary_out, "Write the aggregate CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints help or the usage error
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*c_gen) return cmd_generate(gen);
    if (*c_clu) {
      if (clu.common.model == "gauss") {
        auto [model, data] = load_gauss(clu.common);
        return run_cluster(model, data, clu);
      }
      auto [model, data] = load_dcm(clu.common);
      return run_cluster(model, data, clu);
    }
    if (*c_exa) {
      if (exa.model == "gauss") {
        auto [model, data] = load_gauss(exa);
        return run_exact(model, data, exa);
      }
      auto [model, data] = load_dcm(exa);
      return run_exact(model, data, exa);
    }
    if (*c_gib || *c_spm) {
      SamplerOpts& s = *c_gib ? gib : spm;
      const SamplerKind kind = *c_gib ? SamplerKind::kGibbs : SamplerKind::kSplitMerge;
      if (s.common.model == "gauss") {
        auto [model, data] = load_gauss(s.common);
        return run_sampler(model, data, s, kind);
      }
      auto [model, data] = load_dcm(s.common);
      return run_sampler(model, data, s, kind);
    }
    if (*c_eval) return cmd_eval(eval_pred, eval_truth, eval_out);
    if (*c_ben) return cmd_bench(ben);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
