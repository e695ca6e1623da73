#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "survshap/csv.hpp"
#include "survshap/error.hpp"
#include "survshap/report.hpp"

namespace fs = std::filesystem;
using survshap::ValidationError;
using survshap::cli::parse_selector;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::path(SURVSHAP_TEST_TMP) / "cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + SURVSHAP_CLI + "\" " + args + " >" + at("stdout.txt") + " 2>" +
                          at("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) { return survshap::read_text_file(path); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("observation selectors") {
    CHECK(parse_selector("all", 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK(parse_selector("4", 10) == std::vector<std::size_t>{4});
    CHECK(parse_selector("2:5", 10) == std::vector<std::size_t>{2, 3, 4});
    CHECK(parse_selector("7, 0:2", 10) == std::vector<std::size_t>{7, 0, 1});
    CHECK_THROWS_AS(parse_selector("10", 10), ValidationError);
    CHECK_THROWS_AS(parse_selector("3:3", 10), ValidationError);
    CHECK_THROWS_AS(parse_selector("2:11", 10), ValidationError);
    CHECK_THROWS_AS(parse_selector("x", 10), ValidationError);
    CHECK_THROWS_AS(parse_selector("-1", 10), ValidationError);
    CHECK_THROWS_AS(parse_selector("1,1", 10), ValidationError);
    CHECK_THROWS_AS(parse_selector("", 10), ValidationError);
  }

  TEST_CASE("generate is byte-identical across runs and thread counts") {
    REQUIRE(run("generate --kind exp1 --n 150 --seed 4 --threads 1 --out " + at("a.csv")) == 0);
    REQUIRE(run("generate --kind exp1 --n 150 --seed 4 --threads 3 --out " + at("b.csv")) == 0);
    CHECK(slurp(at("a.csv")) == slurp(at("b.csv")));
    const auto d = survshap::read_dataset_csv(at("a.csv"));
    CHECK(d.rows() == 150);
    CHECK(d.cols() == 5);
    REQUIRE(run("generate --kind dataset0 --n 40 --out " + at("s.csv")) == 0);
    const auto s = survshap::read_dataset_csv(at("s.csv"));
    for (std::size_t i = 0; i < s.rows(); ++i) {
      double r2 = 0.0;
      for (double v : s.row(i)) r2 += v * v;
      CHECK(std::abs(std::sqrt(r2) - 8.0) < 1e-12);
    }
  }

  TEST_CASE("every run writes a manifest that replays the run") {
    REQUIRE(run("generate --kind exp1 --n 120 --seed 1 --out " + at("d.csv")) == 0);
    REQUIRE(run("fit --model cph --data " + at("d.csv") + " --out " + at("cph.json")) == 0);
    CHECK(slurp(at("stdout.txt")).find("ibs=") != std::string::npos);
    REQUIRE(run("explain --model " + at("cph.json") + " --data " + at("d.csv") + " --rows 0:3 --method sampling "
                "--permutations 20 --seed 9 --out " + at("e.csv")) == 0);
    const auto manifest = nlohmann::json::parse(slurp(at("e.csv") + ".manifest.json"));
    CHECK(manifest["command"] == "explain");
    CHECK(manifest["seed"] == 9);
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["outputs"][0] == at("e.csv"));
    std::string config = manifest["config"];
    const std::string replayed = at("e_replay.csv");
    config.replace(config.find(at("e.csv")), at("e.csv").size(), replayed);
    std::ofstream(at("replay.toml")) << config;
    REQUIRE(run("--config " + at("replay.toml")) == 0);
    CHECK(slurp(replayed) == slurp(at("e.csv")));
  }

  TEST_CASE("kernel explanations of a Cox model reconstruct the prediction") {
    REQUIRE(run("generate --kind exp1 --n 120 --seed 2 --out " + at("k.csv")) == 0);
    REQUIRE(run("fit --model cph --data " + at("k.csv") + " --out " + at("k.json")) == 0);
    REQUIRE(run("explain --model " + at("k.json") + " --data " + at("k.csv") + " --rows 5 --out " + at("ke.csv")) == 0);
    const auto records = survshap::parse_explanations(slurp(at("ke.csv")));
    CHECK(records.back().record == "error");
    CHECK(records.back().value <= 1e-10);
    REQUIRE(run("evaluate --model " + at("k.json") + " --data " + at("k.csv") + " --explanations " + at("ke.csv") +
                " --out " + at("km.csv")) == 0);
    for (const auto& m : survshap::parse_metrics(slurp(at("km.csv")))) {
      if (m.metric == "sigma") CHECK(*m.value <= 1e-9);
    }
  }

  TEST_CASE("explain output does not depend on the thread count") {
    REQUIRE(run("generate --kind exp1 --n 100 --seed 3 --out " + at("t.csv")) == 0);
    REQUIRE(run("fit --model rsf --trees 10 --data " + at("t.csv") + " --out " + at("t.json")) == 0);
    REQUIRE(run("explain --model " + at("t.json") + " --data " + at("t.csv") + " --rows 0:6 --threads 1 --out " +
                at("t1.csv")) == 0);
    REQUIRE(run("explain --model " + at("t.json") + " --data " + at("t.csv") + " --rows 0:6 --threads 4 --out " +
                at("t4.csv")) == 0);
    CHECK(slurp(at("t1.csv")) == slurp(at("t4.csv")));
    REQUIRE(run("explain --method survlime --model " + at("t.json") + " --data " + at("t.csv") +
                " --rows 0:3 --threads 1 --out " + at("l1.csv")) == 0);
    REQUIRE(run("explain --method survlime --model " + at("t.json") + " --data " + at("t.csv") +
                " --rows 0:3 --threads 3 --out " + at("l3.csv")) == 0);
    CHECK(slurp(at("l1.csv")) == slurp(at("l3.csv")));
  }

  TEST_CASE("ranking plot data holds per-rank fractions summing to one") {
    REQUIRE(run("generate --kind exp1 --n 100 --seed 5 --out " + at("r.csv")) == 0);
    REQUIRE(run("fit --model cph --data " + at("r.csv") + " --out " + at("r.json")) == 0);
    REQUIRE(run("explain --model " + at("r.json") + " --data " + at("r.csv") + " --rows 0:8 --out " + at("re.csv")) == 0);
    REQUIRE(run("plotdata --kind ranking --input " + at("re.csv") + " --out " + at("rp.csv")) == 0);
    const auto table = survshap::parse_csv(slurp(at("rp.csv")), "rp.csv");
    std::map<std::string, double> by_rank;
    for (std::size_t i = 0; i < table.rows.size(); ++i) by_rank[table.rows[i][1]] += table.number(i, 2);
    CHECK(by_rank.size() == 5);
    for (const auto& [rank, total] : by_rank) CHECK(total == doctest::Approx(1.0));
    REQUIRE(run("plotdata --kind curves --observation 3 --input " + at("re.csv") + " --out " + at("rc.csv")) == 0);
    CHECK(survshap::parse_csv(slurp(at("rc.csv")), "rc.csv").rows.size() == 5 * survshap::load_model(at("r.json"))->event_grid().size());
  }

  TEST_CASE("validation failures exit with code 2") {
    std::ofstream(at("broken.csv")) << "# survshap-dataset v1\nx1,time,event\n1,abc,1\n";
    CHECK(run("fit --model cph --data " + at("broken.csv") + " --out " + at("broken.json")) == 2);
    CHECK(slurp(at("stderr.txt")).find("line 3") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(at("broken.json") + ".manifest.json"));
    CHECK(manifest["status"] == "validation_error");
    CHECK(run("fit --model cph --data " + at("missing.csv") + " --out " + at("x.json")) == 2);
    CHECK(run("plotdata --kind pie --input " + at("a.csv") + " --out " + at("p.csv")) == 2);
    CHECK(slurp(at("stderr.txt")).find("supported kinds") != std::string::npos);
    CHECK(run("fit --model glm --data " + at("a.csv") + " --out " + at("x.json")) == 2);
    CHECK(run("explain --model " + at("cph.json") + " --data " + at("d.csv") + " --rows 500 --out " + at("x.csv")) == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("--help") == 0);
  }

  TEST_CASE("exact explanations refuse more than twelve features") {
    const auto d = testing::cox_data(80, std::vector<double>(13, 0.05), 3);
    survshap::write_dataset_csv(d, at("wide.csv"));
    REQUIRE(run("fit --model cph --data " + at("wide.csv") + " --out " + at("wide.json")) == 0);
    CHECK(run("explain --method exact --model " + at("wide.json") + " --data " + at("wide.csv") + " --out " +
              at("wide_e.csv")) == 2);
    CHECK(slurp(at("stderr.txt")).find("p <= 12") != std::string::npos);
  }

  TEST_CASE("computation failures exit with code 3") {
    // A constant column makes the Cox information matrix singular.
    std::ofstream out(at("singular.csv"));
    out << "# survshap-dataset v1\nx1,x2,time,event\n";
    for (int i = 0; i < 20; ++i) out << i % 7 << ",1," << (i + 1) << "," << (i % 3 ? 1 : 0) << "\n";
    out.close();
    CHECK(run("fit --model cph --data " + at("singular.csv") + " --out " + at("singular.json")) == 3);
    const auto manifest = nlohmann::json::parse(slurp(at("singular.json") + ".manifest.json"));
    CHECK(manifest["status"] == "computation_error");
  }
}
