#include "pareig/cli.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace pareig;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pareig_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& cmd, const json& config, const fs::path& out,
        const json& overrides = json::object()) {
  const fs::path cfg = out.parent_path() / (out.filename().string() + ".json");
  write_file(cfg, config.dump());
  std::ostringstream log;
  return cli::run_command(cmd, cfg, out, overrides, log);
}

json metadata(const fs::path& out) { return json::parse(read_file(out / "metadata.json")); }

Eigen::MatrixXd read_csv_matrix(const fs::path& p) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace

TEST_CASE("parse_real accepts multiples of pi") {
  CHECK(cli::parse_real(json(1.5)) == 1.5);
  CHECK(cli::parse_real(json("2pi")) == doctest::Approx(2 * pi));
  CHECK(cli::parse_real(json("-pi")) == doctest::Approx(-pi));
  CHECK(cli::parse_real(json("pi/2")) == doctest::Approx(pi / 2));
  CHECK(cli::parse_real(json("0.5*pi")) == doctest::Approx(pi / 2));
  CHECK(cli::parse_real(json("1e-3")) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(cli::parse_real(json("two")), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_real(json::array()), cli::ConfigError);
}

TEST_CASE("solve: constant potential gives lambda = -m0") {
  const auto dir = scratch("const");
  for (double m0 : {-1.0, 0.0, 0.7}) {
    const json cfg{{"grid", {{"N", 32}, {"M", 32}}},
                   {"potential", {{"type", "constant"}, {"value", m0}}}};
    REQUIRE(run("solve", cfg, dir / "out") == cli::ok);
    CHECK(std::abs(metadata(dir / "out")["lambda"].get<double>() + m0) < 1e-10);
  }
}

TEST_CASE("solve: direct problem reproduces omega(t) cos(x)") {
  const auto dir = scratch("sec5");
  const json cfg{{"grid", {{"N", 200}, {"M", 100}}},
                 {"problem", "direct"},
                 {"potential", {{"type", "separable"},
                                {"c", {{"type", "cos"}, {"phase", "pi"}}},
                                {"v", {{"type", "cos"}}}}}};
  REQUIRE(run("solve", cfg, dir / "out") == cli::ok);
  const Eigen::MatrixXd phi = read_csv_matrix(dir / "out" / "solution.csv");
  REQUIRE(phi.rows() == 100);
  REQUIRE(phi.cols() == 200);
  double err = 0;
  for (int j = 0; j < 200; ++j)
    for (int i = 0; i < 100; ++i) {
      const double t = 2 * pi * j / 200, x = -pi + 2 * pi * i / 100;
      err = std::max(err, std::abs(phi(i, j) - 0.5 * (std::cos(t + pi) + std::sin(t + pi)) * std::cos(x)));
    }
  CHECK(err < 0.02);
  // the effective config is echoed
  CHECK(metadata(dir / "out")["config"]["operator"]["alpha"] == 1.0);
}

TEST_CASE("optimize: identical config and seed give identical bytes") {
  const auto dir = scratch("repro");
  const json cfg{{"grid", {{"N", 48}, {"M", 24}}},
                 {"objective", {{"type", "talenti"}, {"k", 2}}},
                 {"constraint", {{"type", "rearrangement"}, {"reference", {{"type", "cos"}}}, {"K", 24}}},
                 {"optimizer", {{"max_iters", 60}}}};
  REQUIRE(run("optimize", cfg, dir / "a", {{"seed", 5}}) == cli::ok);
  REQUIRE(run("optimize", cfg, dir / "b", {{"seed", 5}}) == cli::ok);
  REQUIRE(run("optimize", cfg, dir / "c", {{"seed", 6}}) == cli::ok);
  for (const char* f : {"control.csv", "control_aligned.csv", "trace.csv", "metadata.json"})
    CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
  CHECK(read_file(dir / "a" / "trace.csv") != read_file(dir / "c" / "trace.csv"));
  const json m = metadata(dir / "a");
  CHECK(m["config"]["seed"] == 5);
  CHECK(m["body_check"]["ok"] == true);
  CHECK(m["symmetry"]["relaxed_bound_excess"].get<double>() < 1e-9);
}

TEST_CASE("optimize: eigenvalue over a box-mean field") {
  const auto dir = scratch("field");
  const json cfg{{"grid", {{"T", 1}, {"N", 16}, {"M", 16}}},
                 {"objective", {{"type", "eigenvalue"}}},
                 {"control", "field"},
                 {"constraint", {{"type", "box_mean"}, {"lo", -1}, {"hi", 1}, {"mean", 0}}},
                 {"optimizer", {{"max_iters", 30}}}};
  REQUIRE(run("optimize", cfg, dir / "out") == cli::ok);
  const json m = metadata(dir / "out");
  CHECK(m["direction"] == "minimize");
  CHECK(m["value"].get<double>() <= m["initial_value"].get<double>());
  CHECK(m["feasibility"]["ok"] == true);
  CHECK(fs::exists(dir / "out" / "eigenfunction.csv"));
}

TEST_CASE("sweep and gaussian-check write their tables") {
  const auto dir = scratch("sweep");
  const json sweep{{"grid", {{"N", 32}, {"M", 16}}}, {"values", {10, 100}}};
  REQUIRE(run("sweep", sweep, dir / "s1") == cli::ok);
  REQUIRE(run("sweep", sweep, dir / "s2", {{"threads", 2}}) == cli::ok);
  CHECK(read_file(dir / "s1" / "table.csv") == read_file(dir / "s2" / "table.csv"));
  CHECK(read_file(dir / "s1" / "table.csv").starts_with("mu,lambda,defect,rescaled,status\n"));

  const json g{{"grid", {{"N", 64}}}, {"c", {{"type", "constant"}, {"value", 1.0}}}, {"mu", {2.0}}};
  REQUIRE(run("gaussian-check", g, dir / "g") == cli::ok);
  CHECK(metadata(dir / "g")["lambda_bar"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fs::exists(dir / "g" / "eigenfunction.csv"));
}

TEST_CASE("failures map to exit codes and error.json") {
  const auto dir = scratch("errors");
  CHECK(run("solve", {{"grid", {{"bogus", 1}}}}, dir / "a") == cli::bad_config);
  CHECK(json::parse(read_file(dir / "a" / "error.json"))["kind"] == "config");
  CHECK(run("solve", {{"potential", {{"type", "spiral"}}}}, dir / "b") == cli::bad_config);
  CHECK(run("gaussian-check", {{"c", {{"type", "constant"}, {"value", -1.0}}}}, dir / "c") ==
        cli::bad_config);
  // a gate that cannot pass still writes every artifact
  CHECK(run("gaussian-check", {{"residual_gate", 0.0}, {"c", {{"type", "sin"}, {"offset", 2.0}}}},
            dir / "d") == cli::gate_failed);
  CHECK(fs::exists(dir / "d" / "riccati.csv"));
  CHECK(fs::exists(dir / "d" / "metadata.json"));
  // infeasible box-mean constraint
  CHECK(run("optimize", {{"constraint", {{"type", "box_mean"}, {"lo", 0}, {"hi", 1}, {"mean", 2}}}},
            dir / "e") == cli::bad_config);
  // success clears a stale error.json
  CHECK(run("gaussian-check", json::object(), dir / "a") == cli::ok);
  CHECK_FALSE(fs::exists(dir / "a" / "error.json"));
}
