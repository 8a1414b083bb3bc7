#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

// Path to the command-line binary: baked in at configure time, overridable
// through the environment when running this test binary by hand.
std::string cli_path() {
  if (const char* p = std::getenv("DPMIX_CLI_PATH")) return p;
#ifdef DPMIX_CLI_PATH
  return DPMIX_CLI_PATH;
#else
  REQUIRE_MESSAGE(false, "DPMIX_CLI_PATH must point at the command-line binary");
  return "";
#endif
}

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

// Runs the CLI with the given arguments, capturing stdout/stderr.
RunResult run_cli(const std::string& args) {
  const std::string out_path = "cli_stdout.tmp";
  const std::string err_path = "cli_stderr.tmp";
  const std::string cmd =
      "\"" + cli_path() + "\" " + args + " > " + out_path + " 2> " + err_path;
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

json parse_json(const std::string& text) {
  CAPTURE(text);
  return json::parse(text);
}

std::vector<json> parse_ndjson(const std::string& text) {
  std::vector<json> docs;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) docs.push_back(json::parse(line));
  }
  return docs;
}

struct TempPath {
  std::string path;
  explicit TempPath(const std::string& name) : path("cli_tmp_" + name) { cleanup(); }
  ~TempPath() { cleanup(); }
  void cleanup() const {
    std::remove(path.c_str());
    std::remove((path + ".truth").c_str());
  }
};

int line_count(const std::string& path) {
  std::ifstream in(path);
  int n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("help exits zero; usage errors exit one") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("cluster --help").exit_code == 0);
  CHECK(run_cli("").exit_code == 1);               // a subcommand is required
  CHECK(run_cli("frobnicate").exit_code == 1);     // unknown subcommand
  CHECK(run_cli("cluster").exit_code == 1);        // missing required --data
  CHECK(run_cli("generate --n 5").exit_code == 1); // missing required --out
  const RunResult bad_model =
      run_cli("generate --n 5 --out x.csv --model bogus");
  CHECK(bad_model.exit_code == 1);
}

TEST_CASE("input errors exit one with a diagnostic") {
  const RunResult missing = run_cli("cluster --data no_such_file.csv");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("no_such_file.csv") != std::string::npos);

  const RunResult bad_scorer = run_cli("cluster --data no_such_file.csv --scorer weird");
  CHECK(bad_scorer.exit_code == 1);

  // Enumeration refuses oversized inputs.
  TempPath big("big.csv");
  CHECK(run_cli("generate --n 13 --dim 2 --seed 1 --out " + big.path).exit_code == 0);
  const RunResult too_big = run_cli("exact --data " + big.path);
  CHECK(too_big.exit_code == 1);
}

TEST_CASE("generate writes data plus a truth sidecar") {
  TempPath g("gen.csv");
  const RunResult r = run_cli("generate --n 12 --dim 3 --alpha 1 --seed 5 --out " + g.path);
  REQUIRE(r.exit_code == 0);
  const json doc = parse_json(r.out);
  CHECK(doc["model"] == "gauss");
  CHECK(doc["n"] == 12);
  CHECK(line_count(g.path) == 12);
  CHECK(line_count(g.path + ".truth") == 12);
  CHECK(doc["num_clusters"].get<int>() >= 1);

  // Deterministic in the seed.
  TempPath g2("gen2.csv");
  REQUIRE(run_cli("generate --n 12 --dim 3 --alpha 1 --seed 5 --out " + g2.path).exit_code ==
          0);
  std::ifstream a(g.path), b(g2.path);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}

TEST_CASE("search subcommand reproduces exhaustive enumeration end to end") {
  TempPath g("small.csv");
  REQUIRE(run_cli("generate --n 6 --dim 2 --alpha 1 --seed 8 --out " + g.path).exit_code == 0);

  const RunResult ex = run_cli("exact --data " + g.path + " --alpha 1");
  REQUIRE(ex.exit_code == 0);
  const json exact = parse_json(ex.out);

  const RunResult cl =
      run_cli("cluster --data " + g.path + " --alpha 1 --scorer admissible --beam inf");
  REQUIRE(cl.exit_code == 0);
  const json search = parse_json(cl.out);

  CHECK(std::abs(exact["log_joint"].get<double>() - search["log_joint"].get<double>()) <
        1e-9);
  CHECK(exact["assignment"] == search["assignment"]);
  CHECK(search["aborted"] == false);
  CHECK(search["assignment"].size() == 6);
  CHECK(search["enqueued"].get<long long>() >= search["dequeued"].get<long long>());
  CHECK(search["dequeued"].get<long long>() >= 7);

  // --out writes the same document to a file.
  TempPath o("result.json");
  REQUIRE(run_cli("cluster --data " + g.path + " --alpha 1 --out " + o.path).exit_code == 0);
  std::ifstream in(o.path);
  json from_file;
  in >> from_file;
  CHECK(from_file.contains("log_joint"));
  CHECK(from_file["algorithm"] == "search");
}

TEST_CASE("eval scores a result JSON against the truth sidecar") {
  TempPath g("eval.csv");
  REQUIRE(run_cli("generate --n 10 --dim 2 --alpha 1 --seed 21 --out " + g.path).exit_code ==
          0);
  TempPath pred("pred.json");
  REQUIRE(run_cli("cluster --data " + g.path + " --alpha 1 --out " + pred.path).exit_code ==
          0);
  const RunResult ev =
      run_cli("eval --pred " + pred.path + " --truth " + g.path + ".truth");
  REQUIRE(ev.exit_code == 0);
  const json scores = parse_json(ev.out);
  for (const char* k : {"fscore", "fscore_harmonic", "precision", "recall"}) {
    REQUIRE(scores.contains(k));
    CHECK(scores[k].get<double>() >= 0.0);
    CHECK(scores[k].get<double>() <= 1.0);
  }
  // A labeling against itself is perfect.
  const RunResult self =
      run_cli("eval --pred " + g.path + ".truth --truth " + g.path + ".truth");
  REQUIRE(self.exit_code == 0);
  CHECK(parse_json(self.out)["fscore"].get<double>() == 1.0);

  // Mismatched lengths are an input error.
  TempPath small("small6.csv");
  REQUIRE(run_cli("generate --n 6 --dim 2 --seed 3 --out " + small.path).exit_code == 0);
  CHECK(run_cli("eval --pred " + small.path + ".truth --truth " + g.path + ".truth")
            .exit_code == 1);
}

TEST_CASE("samplers emit one JSON document per run plus a summary") {
  TempPath g("mcmc.csv");
  REQUIRE(run_cli("generate --n 8 --dim 2 --alpha 1 --seed 31 --out " + g.path).exit_code ==
          0);
  for (const std::string algo : {"gibbs", "splitmerge"}) {
    const RunResult r = run_cli(algo + " --data " + g.path +
                                " --alpha 1 --iters 20 --runs 5 --seed 7");
    REQUIRE(r.exit_code == 0);
    const auto docs = parse_ndjson(r.out);
    REQUIRE(docs.size() == 6);  // 5 runs + summary
    double best = -1e308;
    for (std::size_t i = 0; i < 5; ++i) {
      const json& d = docs[i];
      CHECK(d["algorithm"] == algo);
      CHECK(d["run_index"] == static_cast<int>(i));
      CHECK(d["assignment"].size() == 8);
      best = std::max(best, d["best_log_joint"].get<double>());
    }
    const json& summary = docs[5];
    CHECK(summary["summary"] == true);
    CHECK(summary["log_joint"].get<double>() == best);
    CHECK(summary["config"]["iters"] == 20);
  }
}

TEST_CASE("multinomial model round-trip through the CLI") {
  TempPath g("docs.txt");
  REQUIRE(run_cli("generate --model dcm --n 9 --vocab 6 --alpha 1 --lambda 1 --seed 11 --out " +
                  g.path)
              .exit_code == 0);
  const RunResult ex = run_cli("exact --model dcm --data " + g.path + " --alpha 1");
  REQUIRE(ex.exit_code == 0);
  const RunResult cl = run_cli("cluster --model dcm --data " + g.path +
                               " --alpha 1 --scorer trivial --beam inf");
  REQUIRE(cl.exit_code == 0);
  CHECK(std::abs(parse_json(ex.out)["log_joint"].get<double>() -
                 parse_json(cl.out)["log_joint"].get<double>()) < 1e-9);
  // Vocabulary hints that contradict the file are rejected.
  CHECK(run_cli("cluster --model dcm --vocab 2 --data " + g.path).exit_code == 1);
}

TEST_CASE("bench emits well-formed CSV for a tiny matrix") {
  const RunResult r =
      run_cli("bench --sizes 4 --seeds-per-size 1 --iters 5 --runs 3 --threads 1 --seed 2");
  REQUIRE(r.exit_code == 0);
  std::stringstream ss(r.out);
  std::string header;
  REQUIRE(std::getline(ss, header));
  CHECK(header == "n,dataset,method,ok,log_joint,nll_ratio,enqueued,dequeued,wall_ms,fscore");
  int rows = 0;
  std::string line;
  std::vector<std::string> methods;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    ++rows;
    std::stringstream ls(line);
    std::string n, dataset, method;
    std::getline(ls, n, ',');
    std::getline(ls, dataset, ',');
    std::getline(ls, method, ',');
    CHECK(n == "4");
    methods.push_back(method);
  }
  CHECK(rows == 9);  // exact + six search configurations + two samplers
  CHECK(methods.front() == "exact");
}
