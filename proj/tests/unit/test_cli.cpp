#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "cli.hpp"
#include "disrupt/metrics.hpp"
#include "run_record.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

struct Run {
  int rc;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int rc = disrupt::cli::run_cli(args, out, err);
  return {rc, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("disrupt_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Rows of a CSV artifact with '#' header lines removed.
std::vector<std::map<std::string, std::string>> read_csv(const std::string& path) {
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (header.empty()) {
      header = cells;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = i < cells.size() ? cells[i] : "";
    rows.push_back(row);
  }
  return rows;
}

std::map<std::string, std::string> dir_bytes(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path().string());
  return out;
}

}  // namespace

TEST_CASE("content hash is FNV-1a") {
  CHECK(disrupt::cli::content_hash("") == "cbf29ce484222325");
  CHECK(disrupt::cli::content_hash("a") == "af63dc4c8601ec8c");
}

TEST_CASE("metrics on a two-node chain") {
  TempDir t;
  write_file(t / "nodes.csv", "id,year\nA,2000\nB,2001\n");
  write_file(t / "edges.csv", "citing_id,cited_id\nB,A\n");
  const auto r = run({"metrics", "--nodes", t / "nodes.csv", "--edges", t / "edges.csv", "-o", t / "out"});
  REQUIRE(r.rc == 0);
  const auto text = slurp(t / "out/metrics.csv");
  CHECK(text.rfind("# disrupt ", 0) == 0);
  const auto rows = read_csv(t / "out/metrics.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].at("id") == "A");
  CHECK(rows[0].at("cd") == "1");
  CHECK(rows[0].at("cd_nok") == "1");
  CHECK(rows[1].at("cd").empty());

  const auto manifest = json::parse(slurp(t / "out/manifest.json"));
  CHECK(manifest.at("subcommand") == "metrics");
  CHECK(manifest.at("inputs").size() == 2);
  bool listed = false;
  for (const auto& a : manifest.at("artifacts"))
    if (a.at("name") == "metrics.csv") {
      listed = true;
      CHECK(a.at("hash") == disrupt::cli::content_hash(text));
    }
  CHECK(listed);
  const auto validation = ordered::parse(slurp(t / "out/validation.json"));
  CHECK(validation.begin().key() == "run");
}

TEST_CASE("missing input is a structured error") {
  TempDir t;
  write_file(t / "nodes.csv", "id,year\nA,2000\n");
  const auto r = run({"metrics", "--nodes", t / "nodes.csv", "--edges", t / "nope.csv", "-o", t / "out"});
  CHECK(r.rc == 1);
  const auto e = json::parse(r.err).at("error");
  CHECK(e.at("kind") == "not_found");
  CHECK(e.at("subcommand") == "metrics");
  CHECK(e.at("message").get<std::string>().find("input not found") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).rc == 2);
  CHECK(run({"metrics", "--bogus"}).rc == 2);
  const auto r = run({"frobnicate"});
  CHECK(r.rc == 2);
  CHECK(json::parse(r.err).at("error").at("kind") == "usage");
}

TEST_CASE("non-empty output directory needs --force") {
  TempDir t;
  write_file(t / "nodes.csv", "id,year\nA,2000\nB,2001\n");
  write_file(t / "edges.csv", "citing_id,cited_id\nB,A\n");
  const std::vector<std::string> base{"metrics", "--nodes", t / "nodes.csv", "--edges", t / "edges.csv", "-o",
                                      t / "out"};
  REQUIRE(run(base).rc == 0);
  CHECK(run(base).rc == 1);
  auto forced = base;
  forced.push_back("--force");
  CHECK(run(forced).rc == 0);
}

TEST_CASE("reruns are byte-identical across worker counts") {
  TempDir t;
  REQUIRE(run({"synth", "--years", "4", "--works", "60", "--ref-mean", "4", "--rho", "0.3", "--seed", "5", "-o",
               t / "corpus"})
              .rc == 0);
  const std::string nodes = t / "corpus/nodes.csv", edges = t / "corpus/edges.csv";
  for (const std::string sub : {"metrics", "rewire"}) {
    std::vector<std::string> args{sub, "--nodes", nodes, "--edges", edges, "--seed", "9"};
    if (sub == "rewire") args.insert(args.end(), {"-k", "3"});
    auto one = args, four = args;
    one.insert(one.begin(), {"-j", "1"});
    one.insert(one.end(), {"-o", t / (sub + "_1")});
    four.insert(four.begin(), {"-j", "4"});
    four.insert(four.end(), {"-o", t / (sub + "_4")});
    REQUIRE(run(one).rc == 0);
    REQUIRE(run(four).rc == 0);
    CHECK(dir_bytes(t / (sub + "_1")) == dir_bytes(t / (sub + "_4")));
  }
}

TEST_CASE("config file values apply and flags override them") {
  TempDir t;
  write_file(t / "nodes.csv", "id,year\nF,2000\nA,2003\nB,2006\n");
  write_file(t / "edges.csv", "citing_id,cited_id\nA,F\nB,F\n");
  write_file(t / "run.ini", "[metrics]\nwindow=3\n");
  const std::vector<std::string> base{"--config", t / "run.ini", "metrics", "--nodes", t / "nodes.csv",
                                      "--edges", t / "edges.csv"};
  auto a = base;
  a.insert(a.end(), {"-o", t / "a"});
  REQUIRE(run(a).rc == 0);
  CHECK(read_csv(t / "a/metrics.csv")[2].at("id") == "F");
  CHECK(read_csv(t / "a/metrics.csv")[2].at("n_i") == "1");
  auto b = base;
  b.insert(b.end(), {"--window", "6", "-o", t / "b"});
  REQUIRE(run(b).rc == 0);
  CHECK(read_csv(t / "b/metrics.csv")[2].at("n_i") == "2");

  write_file(t / "bad.ini", "[metrics]\nwindw=3\n");
  CHECK(run({"--config", t / "bad.ini", "metrics", "--nodes", t / "nodes.csv", "--edges", t / "edges.csv", "-o",
             t / "c"})
            .rc == 2);
}

TEST_CASE("regress with year dummies only reproduces per-year mean differences") {
  TempDir t;
  REQUIRE(run({"synth", "--years", "4", "--works", "80", "--ref-mean", "5", "--rho", "0.3", "-o", t / "corpus"}).rc ==
          0);
  const std::vector<std::string> graph{"--nodes", t / "corpus/nodes.csv", "--edges", t / "corpus/edges.csv"};
  auto m = std::vector<std::string>{"metrics"};
  m.insert(m.end(), graph.begin(), graph.end());
  m.insert(m.end(), {"-o", t / "m"});
  REQUIRE(run(m).rc == 0);
  auto r = std::vector<std::string>{"regress"};
  r.insert(r.end(), graph.begin(), graph.end());
  r.insert(r.end(), {"--response", "cd_nok", "-o", t / "r"});
  const auto res = run(r);
  REQUIRE_MESSAGE(res.rc == 0, res.err);

  std::map<int, std::pair<double, int>> by_year;
  for (const auto& row : read_csv(t / "m/metrics.csv"))
    if (!row.at("cd_nok").empty()) {
      auto& [s, n] = by_year[std::stoi(row.at("year"))];
      s += std::stod(row.at("cd_nok"));
      ++n;
    }
  const auto fit = json::parse(slurp(t / "r/fit.json"));
  const int base = fit.at("base_year");
  CHECK(base == by_year.begin()->first);
  const double base_mean = by_year.at(base).first / by_year.at(base).second;
  std::size_t seen = 0;
  for (const auto& c : fit.at("fit").at("coefficients")) {
    const std::string name = c.at("name");
    if (name == "const") {
      CHECK(c.at("b").get<double>() == doctest::Approx(base_mean).epsilon(1e-10));
    } else {
      const int y = std::stoi(name.substr(5));
      const double want = by_year.at(y).first / by_year.at(y).second - base_mean;
      CHECK(c.at("b").get<double>() == doctest::Approx(want).epsilon(1e-10));
    }
    ++seen;
  }
  CHECK(seen == by_year.size());
}

TEST_CASE("rewire on a corpus of single-edge strata leaves every z undefined") {
  TempDir t;
  write_file(t / "nodes.csv", "id,year\nA,2000\nB,2001\nC,2002\n");
  write_file(t / "edges.csv", "citing_id,cited_id\nB,A\nC,B\n");
  const auto r = run({"rewire", "--nodes", t / "nodes.csv", "--edges", t / "edges.csv", "-k", "4", "--write-graphs",
                      "-o", t / "out"});
  REQUIRE(r.rc == 0);
  for (const auto& row : read_csv(t / "out/zscores.csv")) {
    // Every replicate equals the observed graph; undefined quantities have no spread at all.
    CHECK((row.at("random_sd") == "0" || row.at("random_sd").empty()));
    CHECK(row.at("z").empty());
  }
  const auto edges = read_csv(t / "out/rewired_edges_r0.csv");
  CHECK(edges.size() == 2);
}

TEST_CASE("audit with the shipped crosswalks") {
  TempDir t;
  REQUIRE(run({"synth", "--years", "3", "--works", "50", "--ref-mean", "3", "-o", t / "corpus"}).rc == 0);
  const auto r = run({"audit", "--nodes", t / "corpus/nodes.csv", "--edges", t / "corpus/edges.csv", "-o",
                      t / "audit"});
  REQUIRE_MESSAGE(r.rc == 0, r.err);
  const auto ex = ordered::parse(slurp(t / "audit/exclusions.json"));
  CHECK(ex.begin().key() == "run");
  for (const auto& row : read_csv(t / "audit/audited.csv")) CHECK(row.at("doctype_meta") == "Research articles");
}

TEST_CASE("nullcheck and synth layered") {
  TempDir t;
  REQUIRE(run({"synth", "--layered", "--works", "60", "--layers", "2", "-o", t / "corpus"}).rc == 0);
  const auto r = run({"nullcheck", "--nodes", t / "corpus/nodes.csv", "--edges", t / "corpus/edges.csv",
                      "--draws", "50", "-o", t / "nc"});
  REQUIRE_MESSAGE(r.rc == 0, r.err);
  const auto j = json::parse(slurp(t / "nc/cocitation.json"));
  CHECK(j.contains("buckets"));
}
