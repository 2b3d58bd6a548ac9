// end-to-end checks of the subheat binary: output formats, exit codes,
// config handling, and byte-for-byte determinism
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string bin_path() {
  const char* env = std::getenv("SUBHEAT_BIN");
  return env ? env : "../subheat";
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  namespace fs = std::filesystem;
  fs::create_directories("cli_tmp");
  const std::string cmd =
      bin_path() + " " + args + " > cli_tmp/out.txt 2> cli_tmp/err.txt";
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp("cli_tmp/out.txt");
  r.err = slurp("cli_tmp/err.txt");
  return r;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("reproduce-table emits the two-regime summary") {
  const RunResult r = run("reproduce-table");
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 9);  // header + 8 rows
  CHECK(r.out.find("cut_conjugate,1.25,5/4,true,quartic_normal_form") != std::string::npos);
  CHECK(r.out.find("degenerate,diagonal,1.5,3/2") != std::string::npos);
  CHECK(r.out.find("degenerate,cut_conjugate,,,,not_applicable") != std::string::npos);
}

TEST_CASE("fit on the vertical closed form recovers the known exponents") {
  const RunResult r = run("fit --model heisenberg --target 0,0,1 --t-grid log:1e-3:1e-1:20");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["n_samples"] == 20);
  CHECK(j["method"] == "closed_form");
  CHECK(j["d2_hat"].get<double>() == doctest::Approx(4.0 * M_PI).epsilon(1e-8));
  CHECK(j["alpha_hat"].get<double>() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(j["C_hat"].get<double>() == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("identical invocations produce byte-identical output") {
  const std::string args =
      "fit --model grushin --from -1,-0.7853981633974483 --to 1,0.7853981633974483 "
      "--t-grid log:0.1:0.4:8";
  const RunResult a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());

  const std::string he = "heat-eval --model heisenberg --target 0,0,1 --t-grid log:0.1:1:5";
  const RunResult c = run(he), d = run(he);
  CHECK(c.code == 0);
  CHECK(c.out == d.out);
}

TEST_CASE("config file values are used and flags override them") {
  {
    std::ofstream cfg("cli_tmp/fit.cfg");
    cfg << "[fit]\nmodel=heisenberg\ntarget=\"0,0,1\"\nt-grid=log:1e-3:1e-1:20\n";
  }
  const RunResult flags =
      run("fit --model heisenberg --target 0,0,1 --t-grid log:1e-3:1e-1:20");
  const RunResult cfg = run("--config cli_tmp/fit.cfg fit");
  CHECK(cfg.code == 0);
  CHECK(cfg.out == flags.out);
  const RunResult over = run("--config cli_tmp/fit.cfg fit --t-grid log:1e-2:1e-1:10");
  CHECK(over.code == 0);
  CHECK(nlohmann::json::parse(over.out)["n_samples"] == 10);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("nosuchcommand").code == 1);
  CHECK(run("verdict --fit cli_tmp/missing_fit.json --n 3 --kernel-dim 1").code == 1);
  CHECK(run("heat-eval --model heisenberg --method closed --target 1,0,1 --t-grid 0.5").code == 1);
  CHECK(run("fit --model heisenberg --target 0,0,1 --t-grid log:1e-3:2e-3:8").code == 1);
  CHECK(run("--help").code == 0);
}

TEST_CASE("numeric failures exit 2 with a JSON diagnostic on stderr") {
  const RunResult r = run("heat-eval --model heisenberg --method gaveau --target 0,0,2 --t-grid 1e-7");
  CHECK(r.code == 2);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "kernel");
  CHECK(j["message"].get<std::string>().find("contour") != std::string::npos);

  const RunResult g = run(
      "glue --model heisenberg --from 0,0,0 --to 0,0,1 --time 0.5 "
      "--box -0.8:0.8,-0.8:0.8,-0.3:0.7");
  CHECK(g.code == 2);
  CHECK(nlohmann::json::parse(g.err)["error"] == "kernel");
}

TEST_CASE("fit then verdict round trip") {
  const RunResult f = run(
      "fit --model heisenberg --target 0,0,1 --t-grid log:1e-3:1e-1:20 "
      "--out cli_tmp/fit_heis.json");
  REQUIRE(f.code == 0);
  const RunResult v = run("verdict --fit cli_tmp/fit_heis.json --n 3 --kernel-dim 1");
  CHECK(v.code == 0);
  const auto j = nlohmann::json::parse(v.out);
  CHECK(j["all_pass"] == true);
  CHECK(j["clauses"]["i"] == true);
  CHECK(j["clauses"]["ii"] == true);
  CHECK(j["predicted_alpha"].is_null());

  // refitting from the sampled CSV gives the same exponents
  const RunResult s = run(
      "heat-eval --model heisenberg --target 0,0,1 --t-grid log:1e-3:1e-1:20 "
      "--out cli_tmp/samples.csv");
  REQUIRE(s.code == 0);
  const RunResult rf = run("fit --samples cli_tmp/samples.csv");
  CHECK(rf.code == 0);
  CHECK(nlohmann::json::parse(rf.out)["alpha_hat"].get<double>() ==
        doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("geodesic CSV closes the unit-circle path") {
  const RunResult r =
      run("geodesic --model heisenberg --covector 1,0,6.283185307179586 --time 1 --samples 4");
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 6);  // header + 5 samples
  CHECK(r.out.rfind("t,q1,q2,q3,p1,p2,p3\n", 0) == 0);
  // last row: returned to the vertical axis with q3 = 1/(4 pi)
  const auto tail = r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1);
  std::stringstream ss(tail);
  std::string tok;
  std::vector<double> row;
  while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
  REQUIRE(row.size() == 7);
  CHECK(row[0] == 1.0);
  CHECK(std::abs(row[1]) < 1e-9);
  CHECK(std::abs(row[2]) < 1e-9);
  CHECK(row[3] == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-9));
}

TEST_CASE("heat-eval matches the frozen two-point ladder") {
  const RunResult r = run(
      "heat-eval --model grushin --from -1,-0.7853981633974483 --to 1,0.7853981633974483 "
      "--t-grid 0.2,0.3,0.5");
  CHECK(r.code == 0);
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "t,value,log_value,method,est_error");
  const double refs[3] = {4.767800572050365e-06, 1.7553237180324367e-04, 2.4863429430608247e-03};
  for (double ref : refs) {
    REQUIRE(std::getline(ss, line));
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    const double val = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(val == doctest::Approx(ref).epsilon(1e-10));
  }
}
