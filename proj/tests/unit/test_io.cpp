#include <doctest.h>

#include <svmlab/cli.hpp>
#include <svmlab/io.hpp>
#include <svmlab/random.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace svmlab;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("svmlab_io_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_cell(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  return a == b;
}

}  // namespace

TEST_CASE("format_cell") {
  CHECK(format_cell(std::int64_t{-42}) == "-42");
  CHECK(format_cell(0.1) == "0.10000000000000001");
  CHECK(format_cell(2.0) == "2.0");
  CHECK(format_cell(1e300) == "1.0000000000000001e+300");
  CHECK(format_cell(std::nan("")) == "nan");
  CHECK(format_cell(HUGE_VAL) == "inf");
  CHECK(format_cell(-HUGE_VAL) == "-inf");
  CHECK(format_cell(std::string("a,b")) == "\"a,b\"");
  CHECK(format_cell(std::string("say \"hi\"")) == "\"say \"\"hi\"\"\"");
  CHECK(format_cell(std::string()) == "\"\"");
  CHECK(format_cell(std::string("plain")) == "plain");
}

TEST_CASE("empty table writes a header-only file") {
  ResultTable t;
  t.columns = {"a", "b"};
  CHECK(to_csv(t) == "a,b\n");
  const auto path = scratch_dir() / "empty.csv";
  write_results(t, path);
  CHECK(slurp(path) == "a,b\n");
  const ResultTable back = read_results(path);
  CHECK(back.columns == t.columns);
  CHECK(back.rows.empty());
}

TEST_CASE("round trip of 1000 random rows") {
  Rng rng(2024);
  ResultTable t;
  t.columns = {"i", "x", "s", "seed"};
  for (int k = 0; k < 1000; ++k) {
    double x = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.below(200)) - 100);
    if (k % 97 == 0) x = std::nan("");
    if (k % 89 == 0) x = -HUGE_VAL;
    if (k % 83 == 0) x = 3.0;
    std::string s = "r" + std::to_string(rng.below(1000));
    if (k % 7 == 0) s += ",\"q\"\nline";
    if (k % 11 == 0) s = "123";
    t.add_row({static_cast<std::int64_t>(rng()) , x, s, std::to_string(rng())});
  }
  const auto path = scratch_dir() / "rows.csv";
  write_results(t, path);
  const std::string first = slurp(path);
  const ResultTable back = read_results(path);
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(back.columns == t.columns);
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      CAPTURE(r);
      CAPTURE(c);
      CHECK(same_cell(back.rows[r][c], t.rows[r][c]));
    }
  write_results(back, path);
  CHECK(slurp(path) == first);
  CHECK(first.find('\r') == std::string::npos);
}

TEST_CASE("write_results failures and row widths") {
  ResultTable t;
  t.columns = {"a"};
  CHECK_THROWS_AS(t.add_row({std::int64_t{1}, 2.0}), InputError);
  CHECK_THROWS_AS(write_results(t, "/nonexistent-dir/x/out.csv"), IoError);
  CHECK_THROWS_AS(read_results("/nonexistent-dir/x/out.csv"), IoError);
  CHECK_THROWS_AS(parse_csv("a,b\n\"open"), InputError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), InputError);

  const auto dir = scratch_dir() / "atomic";
  std::filesystem::create_directories(dir);
  t.add_row({std::int64_t{1}});
  write_results(t, dir / "t.csv");
  write_results(t, dir / "t.csv");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
}

TEST_CASE("parse_args defaults") {
  const RunConfig rates = parse_args({"rates", "--problem", "power-gap-1d", "--p", "1"});
  CHECK(rates.subcommand == "rates");
  CHECK(rates.problem == "power-gap-1d");
  CHECK(rates.p == 1.0);
  CHECK(rates.sigma == 0.2);
  CHECK(rates.lambda == 1e-4);
  CHECK(rates.trials == 100);
  CHECK(rates.seed == 0);
  CHECK(rates.n_grid == std::vector<std::int64_t>{16, 32, 64, 128, 256, 512, 1024});
  CHECK(rates.out == "rates.csv");

  const RunConfig verify = parse_args({"verify"});
  CHECK(verify.subcommand == "verify");
  CHECK(verify.problem.empty());
  CHECK(verify.trials == 100);
  CHECK(verify.out == "verify.csv");

  const RunConfig cmp = parse_args({"compare"});
  CHECK(cmp.problem == "gap-step-1d");
  CHECK(cmp.sigma == 0.1);
  CHECK(cmp.lambda == 1e-6);

  const RunConfig lv = parse_args({"levelsets", "--noiseless", "--lambda", "0.01", "--out", "o/l.csv"});
  CHECK(lv.problem == "sine-2d");
  CHECK(lv.noiseless);
  CHECK(lv.lambda == 0.01);
  CHECK(lv.out == "o/l.csv");

  const RunConfig grid = parse_args({"rates", "--n-grid", "10,20,40", "--seed", "18446744073709551615"});
  CHECK(grid.n_grid == std::vector<std::int64_t>{10, 20, 40});
  CHECK(grid.seed == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("parse_args usage errors") {
  CHECK_THROWS_AS(parse_args({"rates", "--lambda", "-1"}), UsageError);
  CHECK_THROWS_AS(parse_args({"rates", "--sigma", "0"}), UsageError);
  CHECK_THROWS_AS(parse_args({"rates", "--trials", "abc"}), UsageError);
  CHECK_THROWS_AS(parse_args({"rates", "--bogus"}), UsageError);
  CHECK_THROWS_AS(parse_args({"rates", "--problem", "nope"}), UsageError);
  CHECK_THROWS_AS(parse_args({"rates", "--n-grid", "10,-3"}), UsageError);
  CHECK_THROWS_AS(parse_args({}), UsageError);
  CHECK_THROWS_AS(parse_args({"plot"}), UsageError);
  CHECK_THROWS_AS(parse_args({"--help"}), HelpRequested);
}

TEST_CASE("main_entry exit codes") {
  std::ostringstream out, err;
  const char* bad[] = {"svmlab", "rates", "--lambda", "-1"};
  CHECK(main_entry(4, bad, out, err) == 2);
  CHECK(err.str().find("usage error") != std::string::npos);

  const char* help[] = {"svmlab", "--help"};
  CHECK(main_entry(2, help, out, err) == 0);

  const auto path = (scratch_dir() / "cmp.csv").string();
  const char* cmp[] = {"svmlab", "compare", "--lambda", "1e-2", "--out", path.c_str()};
  CHECK(main_entry(6, cmp, out, err) == 0);
  CHECK(std::filesystem::exists(path));
  CHECK(std::filesystem::exists(sibling_path(path, "_curves")));

  const char* unwritable[] = {"svmlab", "compare", "--out", "/nonexistent-dir/x/c.csv"};
  CHECK(main_entry(4, unwritable, out, err) == 1);
}

TEST_CASE("sibling_path") {
  CHECK(sibling_path("out/rates.csv", "_summary") == std::filesystem::path("out/rates_summary.csv"));
  CHECK(sibling_path("r.csv", "_fit") == std::filesystem::path("r_fit.csv"));
}
