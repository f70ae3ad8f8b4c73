#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "optrec/cli.hpp"
#include "optrec/errors.hpp"
#include "optrec/h2_identify.hpp"

using namespace optrec;
using namespace optrec::cli;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    FAIL("missing column " << name);
    return 0;
  }
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream is(text);
  std::string line;
  REQUIRE(std::getline(is, line));
  t.header = split(line, ',');
  while (std::getline(is, line)) {
    t.rows.push_back(split(line, ','));
    CHECK(t.rows.back().size() == t.header.size());
  }
  return t;
}

RunConfig config(const std::string& command) {
  RunConfig c;
  c.command = command;
  return c;
}

struct Process {
  int code = -1;
  std::string out;
};

Process sysid(const std::string& args) {
  const std::string cmd = std::string(SYSID_BINARY) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Process p;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) p.out.append(buf, got);
  const int status = pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

}  // namespace

TEST_CASE("n specifications") {
  CHECK(parse_n_spec("5") == std::vector<std::size_t>{5});
  CHECK(parse_n_spec("2:4") == std::vector<std::size_t>{2, 3, 4});
  CHECK(parse_n_spec("1,8,3") == std::vector<std::size_t>{1, 8, 3});
  for (const char* bad : {"", "0", "4:2", "x", "1,,2", "-3", "1:"}) {
    INFO(std::string(bad));
    CHECK_THROWS_AS(parse_n_spec(bad), PreconditionError);
  }
}

TEST_CASE("resolved defaults") {
  auto c = config("mu-da");
  c.m = 16;
  CHECK(c.resolved_grid_size() == 128);
  CHECK(c.resolved_zeta0_angle() == doctest::Approx(3.14159265358979323846 / 16));
  CHECK(c.resolved_n().size() == 16);
  auto k = config("kappa");
  k.m = 64;
  CHECK(k.resolved_n() == std::vector<std::size_t>{1, 8, 16, 32, 48, 56, 60, 63, 64});
}

TEST_CASE("validation") {
  auto c = config("mu-h2");
  c.r = 1.0;
  CHECK_THROWS_AS(validate(c), PreconditionError);
  c.r = 0.0;
  c.m = 2;
  CHECK_THROWS_AS(validate(c), PreconditionError);
  c.m = 1;
  CHECK_NOTHROW(validate(c));
  c = config("mu-h2");
  c.m = 4;
  c.n = std::vector<std::size_t>{5};
  CHECK_THROWS_AS(validate(c), PreconditionError);

  auto k = config("kappa");
  k.scheme = Scheme::random;
  CHECK_THROWS_AS(validate(k), PreconditionError);
  k.scheme = Scheme::equi;
  k.m = 8;
  k.grid_size = 63;
  CHECK_THROWS_AS(validate(k), PreconditionError);

  auto o = config("oracle");
  o.d = 10;
  CHECK_THROWS_AS(validate(o), PreconditionError);
  o.d.reset();
  o.m = 3;
  CHECK_THROWS_AS(validate(o), PreconditionError);

  auto s = config("mu-da");
  s.tol_gap = 0.0;
  CHECK_THROWS_AS(validate(s), PreconditionError);
  CHECK_THROWS_AS(validate(config("bogus")), PreconditionError);
}

TEST_CASE("mu-h2 table") {
  auto c = config("mu-h2");
  c.m = 8;
  c.seeds = 2;
  const auto res = run(c);
  CHECK(res.exit_code == kExitOk);
  const auto t = parse_csv(res.text);
  CHECK(t.header == std::vector<std::string>{"experiment", "point_scheme", "m", "n", "r", "seed", "mu",
                                             "mu_closed_form", "rcond", "status"});
  CHECK(t.rows.size() == 8 + 2 * 8);
  const double closed = h2::equispaced_mu_closed_form(0.5, 8);
  for (const auto& row : t.rows) {
    CHECK(row[t.col("status")] == "ok");
    if (row[t.col("point_scheme")] == "equispaced_circle")
      CHECK(std::abs(std::stod(row[t.col("mu")]) - closed) < 1e-10);
    else
      CHECK(row[t.col("mu_closed_form")].empty());
  }

  auto one = config("mu-h2");
  one.m = 1;
  one.r = 0.0;
  one.scheme = Scheme::equi;
  const auto single = parse_csv(run(one).text);
  REQUIRE(single.rows.size() == 1);
  CHECK(std::stod(single.rows[0][single.col("mu")]) == 1.0);
}

TEST_CASE("identify, mu-da, estimate and kappa tables") {
  auto id = config("identify");
  id.m = 8;
  const auto ri = run(id);
  CHECK(ri.exit_code == kExitOk);
  const auto ti = parse_csv(ri.text);
  for (const auto& row : ti.rows) {
    CHECK(row[ti.col("status")] == "ok");
    CHECK(std::stod(row[ti.col("h2_error")]) <=
          std::stod(row[ti.col("bound")]) + std::stod(row[ti.col("slack")]));
  }

  auto da = config("mu-da");
  da.m = 8;
  da.n = std::vector<std::size_t>{1, 8};
  const auto rd = run(da);
  CHECK(rd.exit_code == kExitOk);
  const auto td = parse_csv(rd.text);
  CHECK(td.rows.size() == 4);
  for (const auto& row : td.rows) {
    CHECK(row[td.col("status")] == "ok");
    if (row[td.col("n")] == "1") CHECK(std::abs(std::stod(row[td.col("mu")]) - 2.0) < 1e-8);
  }

  auto es = config("estimate");
  es.m = 8;
  es.seeds = 2;
  const auto re = run(es);
  CHECK(re.exit_code == kExitOk);
  const auto te = parse_csv(re.text);
  CHECK(te.rows.size() == 2 * 8 + 2 * 8);
  for (const auto& row : te.rows)
    CHECK(std::stod(row[te.col("est_error")]) <=
          std::stod(row[te.col("bound")]) + std::stod(row[te.col("slack")]));

  auto ka = config("kappa");
  ka.m = 8;
  ka.scheme = Scheme::equi;
  const auto rk = run(ka);
  CHECK(rk.exit_code == kExitOk);
  const auto tk = parse_csv(rk.text);
  CHECK(tk.rows.front()[tk.col("ratio")].empty());
  CHECK(std::stoul(tk.rows.front()[tk.col("grid_size")]) == 64);

  // at n = m the reference column is ln m
  for (const std::size_t m : {16, 32, 64}) {
    auto full = config("kappa");
    full.m = m;
    full.n = std::vector<std::size_t>{m};
    const auto tf = parse_csv(run(full).text);
    REQUIRE(tf.rows.size() == 1);
    CHECK(std::stod(tf.rows[0][tf.col("reference")]) == std::log(static_cast<double>(m)));
  }
}

TEST_CASE("oracle document") {
  auto o = config("oracle");
  o.instances = 5;
  o.samples = 50;
  const auto res = run(o);
  CHECK(res.exit_code == kExitOk);
  const auto doc = nlohmann::json::parse(res.text);
  CHECK(doc["all_passed"] == true);
  CHECK(doc["instance_summary"].size() == 5);
  CHECK(!doc["checks"].empty());
}

TEST_CASE("command line exit codes") {
  CHECK(sysid("--help").code == 0);
  CHECK(sysid("mu-h2 --m 4 --scheme equi").code == kExitOk);
  CHECK(sysid("mu-h2 --m 4 --bogus 1").code == kExitConfig);
  CHECK(sysid("mu-h2 --m 4 --n 0").code == kExitConfig);
  CHECK(sysid("mu-da --m 8 --zeta0-angle 0").code == kExitConfig);
  CHECK(sysid("mu-h2 --m 64 --r 0.1 --n 64 --scheme equi").code == kExitConditioning);
  CHECK(sysid("mu-da --m 16 --n 8 --tol-gap 1e-30 --max-iter 50 --scheme equi").code == kExitSolver);
  const auto empty = sysid("oracle --d 6 --m 3 --n 1 --epsilon 1e-12 --instances 3");
  CHECK(empty.code == kExitConfig);
  CHECK(nlohmann::json::parse(empty.out)["error"]["type"] == "empty_feasible_set");
}

TEST_CASE("config files and precedence") {
  const std::string path = "test_cli_config.json";
  {
    std::ofstream f(path);
    f << R"({"m": 4, "r": 0.3, "scheme": "equi"})";
  }
  const auto from_file = parse_csv(sysid("mu-h2 --config " + path).out);
  CHECK(from_file.rows.size() == 4);
  CHECK(from_file.rows[0][from_file.col("r")] == "0.29999999999999999");
  const auto overridden = parse_csv(sysid("mu-h2 --config " + path + " --r 0.5").out);
  CHECK(overridden.rows[0][overridden.col("r")] == "0.5");
  {
    std::ofstream f(path);
    f << R"({"m": 4, "unknown-key": 1})";
  }
  CHECK(sysid("mu-h2 --config " + path).code == kExitConfig);
  std::remove(path.c_str());
}

TEST_CASE("runs are byte-identical, independent of the thread count") {
  const auto a = sysid("estimate --m 8 --seeds 3");
  const auto b = sysid("estimate --m 8 --seeds 3 --threads 2");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find('\r') == std::string::npos);

  const std::string path = "test_cli_out.csv";
  CHECK(sysid("estimate --m 8 --seeds 3 --out " + path).code == 0);
  std::ifstream f(path, std::ios::binary);
  const std::string written((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(written == a.out);
  std::remove(path.c_str());
}
