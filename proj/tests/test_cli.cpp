#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "obliq/cli.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "obliq");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = obliq::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("demo decodes the chosen item") {
  const Run r0 = run({"demo", "--seed", "1", "--db", "01", "--choice", "0"});
  CHECK(r0.code == obliq::cli::kExitOk);
  CHECK(r0.out.find("family explicit") != std::string::npos);
  CHECK(r0.out.find("decoded item 0 = 0") != std::string::npos);
  const Run r1 = run({"demo", "--seed", "1", "--db", "01", "--choice", "1"});
  CHECK(r1.out.find("decoded item 1 = 1") != std::string::npos);
  CHECK(run({"demo", "--seed", "1"}).out == run({"demo", "--seed", "1"}).out);
}

TEST_CASE("usage errors exit 1 and name the flag") {
  const Run bad_db = run({"demo", "--seed", "1", "--db", "5"});
  CHECK(bad_db.code == obliq::cli::kExitUsage);
  CHECK(bad_db.err.find("--db") != std::string::npos);
  CHECK(run({"demo"}).code == obliq::cli::kExitUsage);
  CHECK(run({"demo", "--seed", "1", "--choice", "2"}).err.find("--choice") != std::string::npos);
  CHECK(run({"session", "--seed", "1"}).code == obliq::cli::kExitUsage);
  CHECK(run({"session", "--seed", "1", "--db", "3", "--strategy", "bogus"}).err.find("--strategy") != std::string::npos);
  CHECK(run({"session", "--seed", "1", "--k", "3", "--db", "2C9", "--m", "2"}).code == obliq::cli::kExitUsage);
  CHECK(run({"session", "--seed", "1", "--db", "3", "--family", "tensorized"}).err.find("--family") != std::string::npos);
  CHECK(run({"verify", "--suite", "nope"}).code == obliq::cli::kExitUsage);
  CHECK(run({"scan", "--seed", "1", "--k", "2..9", "--m", "2"}).code == obliq::cli::kExitUsage);
  CHECK(run({"scan", "--seed", "1", "--k", "x"}).err.find("--k") != std::string::npos);
  CHECK(run({"nonsense"}).code == obliq::cli::kExitUsage);
  CHECK(run({"--help"}).code == obliq::cli::kExitOk);
}

TEST_CASE("io errors exit 3") {
  CHECK(run({"demo", "--seed", "1", "--out", "/nonexistent-dir/x.txt"}).code == obliq::cli::kExitIo);
}

TEST_CASE("sessions are byte-identical for a fixed seed") {
  const std::vector<std::string> args = {"session", "--k", "3", "--m", "2", "--db", "2C", "--choice", "2", "--seed", "4"};
  const Run a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const nlohmann::json j = nlohmann::json::parse(a.out);
  CHECK(j["decoded"]["value"] == 0);
  CHECK(j["k"] == 3);

  const Run hardened = run({"session", "--m", "2", "--family", "walsh", "--db", "9", "--choice", "1", "--rounds", "3",
                            "--mask", "--seed", "4"});
  CHECK(hardened.code == 0);
  const nlohmann::json h = nlohmann::json::parse(hardened.out);
  CHECK(h["xor_rounds"] == 3);
  CHECK(h["recovered"] == 1);
  CHECK(h.contains("mask"));

  const Run invert = run({"session", "--db", "2", "--strategy", "invert", "--guess", "0", "--seed", "9"});
  CHECK(invert.code == 0);
  const Run parity = run({"session", "--family", "explicit", "--db", "3", "--strategy", "parity", "--seed", "9"});
  CHECK(parity.code == 0);

  const auto path = std::filesystem::temp_directory_path() / "obliq_cli_session.json";
  std::vector<std::string> with_out = args;
  with_out.insert(with_out.end(), {"--out", path.string()});
  CHECK(run(with_out).code == 0);
  std::ifstream in(path);
  std::stringstream file;
  file << in.rdbuf();
  CHECK(file.str() == a.out);
  std::filesystem::remove(path);
}

TEST_CASE("verify suites") {
  const Run hk = run({"verify", "--suite", "hk", "--k", "3", "--m", "1", "--trials", "2000"});
  CHECK(hk.code == obliq::cli::kExitOk);
  const nlohmann::json j = nlohmann::json::parse(hk.out);
  CHECK(j["passed"] == true);
  CHECK(j["reports"][0]["details"]["proven_bound"].get<double>() == doctest::Approx(4.5));
  CHECK(run({"verify", "--suite", "honest"}).code == obliq::cli::kExitOk);
  CHECK(run({"verify", "--suite", "entropic", "--trials", "500", "--seed", "2"}).code == obliq::cli::kExitOk);
  CHECK(run({"verify", "--suite", "povm", "--trials", "40", "--seed", "2"}).code == obliq::cli::kExitOk);
  CHECK(run({"verify", "--suite", "entropic"}).code == obliq::cli::kExitUsage);
}

TEST_CASE("scan writes one row per cell") {
  const std::vector<std::string> args = {"scan", "--k", "2..3", "--m", "1", "--seed", "3", "--restarts", "2",
                                         "--iterations", "40"};
  const Run a = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == run(args).out);
  std::istringstream lines(a.out);
  int rows = 0;
  for (std::string line; std::getline(lines, line);) rows += line.empty() || line[0] == '#' ? 0 : 1;
  CHECK(rows == 3);  // header plus two cells
}
