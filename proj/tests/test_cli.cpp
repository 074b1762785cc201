#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtd/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = WTD_DATA_DIR;

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("wtd_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "wtd");
  std::ostringstream out, err;
  return wtd::cli::run(args, out, err);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

json load(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and parse errors") {
  CHECK(run({"--help"}) == wtd::cli::kExitOk);
  CHECK(run({"fit", "--help"}) == wtd::cli::kExitOk);
  CHECK(run({}) == wtd::cli::kExitConfig);
  CHECK(run({"simulate", "--bogus", "1"}) == wtd::cli::kExitConfig);
  CHECK(run({"nonsense"}) == wtd::cli::kExitConfig);
  CHECK(!wtd::cli::version().empty());
}

TEST_CASE("domain errors exit with 2") {
  Scratch s;
  CHECK(run({"simulate", "--a", "1.5", "--out", s / "x.csv"}) == wtd::cli::kExitConfig);
  CHECK(run({"simulate", "--theta", "2.0", "--t-max", "100", "--out", s / "x.csv"}) ==
        wtd::cli::kExitConfig);
  CHECK(run({"iet-run", "--def", s / "missing.json", "--out", s / "x.csv"}) == wtd::cli::kExitConfig);
  CHECK(run({"iet-run", "--def", kData + "/rotation_half.json", "--x", "1/2", "--n", "10", "--out",
             s / "x.csv"}) == wtd::cli::kExitConfig);
  CHECK(run({"reproduce", "--a", "0", "--t-max", "1e3", "--out", s / "x.json"}) ==
        wtd::cli::kExitConfig);
}

TEST_CASE("fit on the exact square fixture reports exponent one") {
  Scratch s;
  const std::string out = s / "fit.json";
  REQUIRE(run({"fit", "--in", kData + "/fixtures/n_squared.csv", "--kind", "cyclesum", "--window",
               "1e2:1e6", "--out", out}) == wtd::cli::kExitOk);
  const auto j = load(out);
  CHECK(std::abs(j["exponent"].get<double>() - 1.0) < 1e-6);
  CHECK(std::abs(j["slope"].get<double>() - 2.0) < 1e-6);
  CHECK(j["kind"] == "cyclesum");
  CHECK(fs::exists(out + ".manifest.json"));
  const auto m = load(out + ".manifest.json");
  CHECK(m["subcommand"] == "fit");
  CHECK(m["version"] == wtd::cli::version());
  CHECK(m.contains("wall_time_seconds"));
}

TEST_CASE("fit with too few points exits with 3") {
  Scratch s;
  CHECK(run({"fit", "--in", kData + "/fixtures/n_squared.csv", "--window", "1e5:1.2e5", "--out",
             s / "fit.json"}) == wtd::cli::kExitInsufficientData);
}

TEST_CASE("simulate writes a headed CSV and is deterministic") {
  Scratch s;
  const std::vector<std::string> args{"simulate", "--t-max", "1e4", "--seed", "3"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", s / "a.csv"});
  b.insert(b.end(), {"--out", s / "b.csv"});
  REQUIRE(run(a) == wtd::cli::kExitOk);
  REQUIRE(run(b) == wtd::cli::kExitOk);
  CHECK(first_line(s / "a.csv") == "t,d_now,d_max,avg_d");
  CHECK(slurp(s / "a.csv") == slurp(s / "b.csv"));
  CHECK(fs::exists(s / "a.csv.manifest.json"));
}

TEST_CASE("iet-run streams counts and pairings") {
  Scratch s;
  const std::string out = s / "cycles.csv";
  REQUIRE(run({"iet-run", "--def", kData + "/genus2.json", "--x", "0", "--n", "10000", "--out", out}) ==
          wtd::cli::kExitOk);
  CHECK(first_line(out) == "n,count_A,count_B,count_C,count_D,pairing_0,cycle_sum");
  REQUIRE(run({"iet-run", "--def", kData + "/rotation_half.json", "--x", "1/4", "--n", "6",
               "--stride", "1", "--exact", "--out", out}) == wtd::cli::kExitOk);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "1,1,0,1,1");
  CHECK(rows[5] == "6,3,3,0,3");
}

TEST_CASE("lyapunov and reproduce write their reports") {
  Scratch s;
  REQUIRE(run({"lyapunov", "--def", kData + "/genus2.json", "--steps", "2000", "--out",
               s / "l.json"}) == wtd::cli::kExitOk);
  const auto l = load(s / "l.json");
  CHECK(l["ratio"].get<double>() > 0.0);
  CHECK(l["ratio"].get<double>() < 1.0);
  CHECK(l["log_scale"].size() == 2000);

  REQUIRE(run({"reproduce", "--t-max", "1e4", "--n-directions", "4", "--seed", "7", "--out",
               s / "e.json"}) == wtd::cli::kExitOk);
  const auto e = load(s / "e.json");
  CHECK(e["directions"].size() == 4);
  CHECK(e.contains("pass"));
  CHECK(e["band"] == json::array({0.5, 0.8}));
  REQUIRE(run({"reproduce", "--t-max", "1e4", "--n-directions", "4", "--seed", "7", "--out",
               s / "e2.json"}) == wtd::cli::kExitOk);
  CHECK(slurp(s / "e.json") == slurp(s / "e2.json"));
}

}  // TEST_SUITE
