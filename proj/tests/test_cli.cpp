#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asdca/cli.hpp"

using namespace asdca;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("asdca_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("argument helpers") {
  const auto spec = cli::parse_synthetic("100,20,0.5,0.1,7");
  CHECK(spec.n == 100);
  CHECK(spec.d == 20);
  CHECK(spec.sparsity == 0.5);
  CHECK(spec.label_noise == 0.1);
  CHECK(spec.seed == 7);
  CHECK(cli::parse_synthetic("10,2,1,0,1,0.05").margin == 0.05);
  CHECK_THROWS(cli::parse_synthetic("10,2,1"));
  CHECK_THROWS(cli::parse_synthetic("10,2,x,0,1"));
  CHECK(cli::resolve_batch_sizes({1e-4, 1e-3, 1e-2}, 1000) == std::vector<std::size_t>{1, 10});
  CHECK(cli::parse_count_list("3, 1,2") == std::vector<std::size_t>{3, 1, 2});
  CHECK_THROWS(cli::parse_count_list("1,-2"));
}

TEST_CASE("run writes a deterministic trace and exits 0 on convergence") {
  const auto dir = scratch("run");
  const std::vector<std::string> args{"run", "--synthetic", "200,20,0.5,0.1,3", "--algorithm", "asdca", "--m", "10",
                                      "--seed", "4"};
  auto a = args;
  a.insert(a.end(), {"--out", (dir / "a.csv").string()});
  auto b = args;
  b.insert(b.end(), {"--out", (dir / "b.csv").string()});
  CHECK(run_cli(a).code == cli::kSuccess);
  CHECK(run_cli(b).code == cli::kSuccess);
  const auto text = slurp(dir / "a.csv");
  CHECK(text == slurp(dir / "b.csv"));
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == std::vector<std::string>{"iteration", "examples_processed", "primal", "dual", "gap"});
  std::size_t prev = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto it = std::stoull(rows[k][0]);
    if (k > 1) CHECK(it > prev);
    prev = it;
    CHECK(std::stoull(rows[k][1]) == it * 10);
    const double primal = std::stod(rows[k][2]);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", primal);
    CHECK(rows[k][2] == buf);
  }
  CHECK(std::stod(rows.back()[4]) <= 1e-6);
}

TEST_CASE("ASDCA with m = n converges") {
  const auto r = run_cli({"run", "--synthetic", "100,10,1,0.1,2", "--m", "100"});
  CHECK(r.code == cli::kSuccess);
  const auto rows = parse_csv(r.out);
  CHECK(std::stod(rows.back()[4]) <= 1e-6);
}

TEST_CASE("test-set columns and the AGD trace") {
  const auto dir = scratch("testset");
  {
    std::ofstream f(dir / "test.svm");
    f << "+1 1:1\n-1 2:1\n+1 1:0.5 2:-0.5\n";
  }
  const auto r = run_cli({"run", "--synthetic", "100,2,1,0,5", "--algorithm", "agd", "--test-data",
                          (dir / "test.svm").string()});
  CHECK(r.code == cli::kSuccess);
  const auto rows = parse_csv(r.out);
  CHECK(rows[0].size() == 7);
  CHECK(rows[0][5] == "test_smoothed_hinge");
  CHECK(rows[0][6] == "test_01");
  CHECK(rows[1][3].empty());
  CHECK(rows[1][5] == "0.5");
  CHECK(rows[1][6] == "1");
  CHECK(rows.back().size() == 7);
}

TEST_CASE("exit codes") {
  CHECK(run_cli({"run", "--data", "/nonexistent.svm"}).code == cli::kInputError);
  CHECK(run_cli({"run", "--synthetic", "50,5,1,0,1", "--bogus"}).code == cli::kInputError);
  CHECK(run_cli({"run"}).code == cli::kInputError);
  CHECK(run_cli({"run", "--synthetic", "50,5,1,0,1", "--data", "x.svm"}).code == cli::kInputError);
  CHECK(run_cli({"run", "--synthetic", "50,5,1,0,1", "--m", "51"}).code == cli::kInputError);
  CHECK(run_cli({"run", "--synthetic", "50,5,1,0,1", "--loss", "hinge"}).code == cli::kInputError);
  CHECK(run_cli({}).code == cli::kInputError);
  const auto capped = run_cli({"run", "--synthetic", "200,20,0.5,0.1,3", "--max-iters", "5", "--epsilon", "1e-9"});
  CHECK(capped.code == cli::kNotConverged);
  CHECK(capped.err.find("warning") != std::string::npos);
}

TEST_CASE("sweep writes one trace per run and a manifest that reproduces it") {
  const auto dir = scratch("sweep");
  const auto first = dir / "first";
  const auto r = run_cli({"sweep", "--synthetic", "1000,10,0.5,0,1", "--out", first.string()});
  REQUIRE(r.code == cli::kSuccess);
  for (const char* f : {"sdca.csv", "asdca_m1.csv", "asdca_m10.csv", "agd.csv", "manifest.json"}) {
    CHECK(fs::exists(first / f));
  }
  CHECK_FALSE(fs::exists(first / "asdca_m0.csv"));
  std::ifstream mf(first / "manifest.json");
  const auto manifest = nlohmann::json::parse(mf);
  CHECK(manifest.at("batch_sizes") == nlohmann::json::array({1, 10}));
  CHECK(manifest.at("lambda").get<double>() == doctest::Approx(1e-3));
  CHECK(manifest.at("runs").size() == 4);
  for (const auto& run : manifest.at("runs")) {
    if (run.at("algorithm") == "asdca") CHECK(run.contains("theta"));
  }
  const auto csv = parse_csv(slurp(first / "asdca_m10.csv"));
  CHECK(csv[0].back() == "primal_subopt");

  const auto second = dir / "second";
  const auto again = run_cli({"sweep", "--manifest", (first / "manifest.json").string(), "--out", second.string()});
  REQUIRE(again.code == cli::kSuccess);
  for (const char* f : {"sdca.csv", "asdca_m1.csv", "asdca_m10.csv", "agd.csv", "manifest.json"}) {
    CHECK(slurp(first / f) == slurp(second / f));
  }
  CHECK(run_cli({"sweep", "--manifest", (dir / "missing.json").string()}).code == cli::kInputError);
}

TEST_CASE("verify passes by default, skips above the bound and catches corruption") {
  const auto ok = run_cli({"verify", "--seeds", "50"});
  CHECK(ok.code == cli::kSuccess);
  const auto rows = parse_csv(ok.out);
  CHECK(rows[0] == std::vector<std::string>{"check", "measured", "bound", "tolerance", "status", "note"});
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k][4] == "pass");

  const auto skipped = run_cli({"verify", "--seeds", "20", "--theta", "0.6"});
  CHECK(skipped.code == cli::kSuccess);
  CHECK(skipped.err.find("warning: skipping theorem1") != std::string::npos);
  bool saw_skip = false;
  for (const auto& row : parse_csv(skipped.out)) saw_skip = saw_skip || (row.size() > 4 && row[4] == "skip");
  CHECK(saw_skip);

  const auto bad = run_cli({"verify", "--seeds", "20", "--inject-corruption"});
  CHECK(bad.code == cli::kInputError);
  bool lemma1_failed = false;
  for (const auto& row : parse_csv(bad.out)) {
    if (row[0].rfind("lemma1", 0) == 0 && row[4] == "fail") lemma1_failed = true;
  }
  CHECK(lemma1_failed);
}

TEST_CASE("cost command") {
  const auto table = run_cli({"cost", "--mode", "table", "--s", "10", "--d", "10000", "--d-bar", "100", "--n",
                              "1000000", "--m", "64"});
  CHECK(table.code == cli::kSuccess);
  const auto rows = parse_csv(table.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[1][0] == "sdca");
  CHECK(rows[4][0] == "agd");
  const auto single = run_cli({"cost", "--s", "1", "--d", "100", "--d-bar", "5", "--n", "1000"});
  for (std::size_t k = 1; k < parse_csv(single.out).size(); ++k) CHECK(parse_csv(single.out)[k][4] == "0");
  const auto rec = run_cli({"cost", "--mode", "recommend", "--s", "4", "--d", "1000", "--d-bar", "20", "--n",
                            "100000", "--m-grid", "1,100,1000"});
  CHECK(rec.code == cli::kSuccess);
  const auto rrows = parse_csv(rec.out);
  REQUIRE(rrows.size() == 6);
  for (std::size_t k = 2; k < rrows.size(); ++k) CHECK(std::stod(rrows[k - 1][5]) <= std::stod(rrows[k][5]));
  CHECK(run_cli({"cost", "--mode", "chart"}).code == cli::kInputError);
  CHECK(run_cli({"cost", "--s", "0"}).code == cli::kInputError);
}
