#include "sweep/io.hpp"
#include "sweep/problems.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace sweep;
using problems::vec;

TEST(TrajectoryCsv, HeaderAndRowCount) {
  const auto tr = simulate_catchup(problems::get("disk-push").spec, ControlSignal::constant(Grid(4), vec({2.0, 0.0})));
  const auto text = io::trajectory_csv(tr);
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x1,x2,u1,u2");
  int rows = 0;
  std::string last;
  while (std::getline(is, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(last.substr(last.size() - 2), ",,");
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  StateTrajectory tr{Grid(3), {vec({0.1, 1.0 / 3.0}), vec({0.2, -2.5e-17}), vec({M_PI, 1e300}), vec({0.0, -0.0})},
                     {vec({1.0 / 7.0}), vec({-4.0}), vec({5e-324})}, std::vector<double>{0.5, 0.0, 1.0 / 9.0}};
  const auto back = io::parse_trajectory_csv(io::trajectory_csv(tr));
  ASSERT_TRUE(back.slacks.has_value());
  EXPECT_EQ(back.grid.N, 3);
  for (int j = 0; j <= 3; ++j) EXPECT_EQ(back.states[j], tr.states[j]);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(back.controls[j], tr.controls[j]);
    EXPECT_EQ((*back.slacks)[j], (*tr.slacks)[j]);
  }
  EXPECT_EQ(io::trajectory_csv(back), io::trajectory_csv(tr));
}

TEST(TrajectoryCsv, MalformedInputIsRejected) {
  EXPECT_THROW(io::parse_trajectory_csv(""), io::IoError);
  EXPECT_THROW(io::parse_trajectory_csv("x1\n0\n1\n"), io::IoError);
  EXPECT_THROW(io::parse_trajectory_csv("t,x1,u1\n0,1,abc\n1,2,\n"), io::IoError);
  EXPECT_THROW(io::parse_trajectory_csv("t,x1,u1\n0,1\n1,2,\n"), io::IoError);
  EXPECT_THROW(io::parse_trajectory_csv("t,x1,w1\n0,1,2\n1,2,\n"), io::IoError);
}

TEST(SolveResultJson, RoundTrip) {
  SolveResult r;
  r.z_star = vec({1.0, 1.0 / 3.0});
  r.mu_eq = vec({0.25});
  r.mu_ineq = Vec();
  r.status = SolveStatus::max_iter;
  r.kkt = {1e-3, 2e-4, 0.0, 5e-9};
  r.iterations = 7;
  r.inner_iterations = 91;
  r.objective = -0.9;
  r.penalty = 1e3;
  const auto back = io::solve_result_from_json(nlohmann::json::parse(io::to_json(r).dump()));
  EXPECT_EQ(io::to_json(back), io::to_json(r));
  EXPECT_EQ(back.z_star, r.z_star);
  EXPECT_EQ(back.status, SolveStatus::max_iter);
}

TEST(Files, WriteReadAndMissing) {
  const auto dir = std::filesystem::temp_directory_path() / "sweep_io_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "a.json").string();
  io::write_json(path, {{"k", 1.5}});
  EXPECT_EQ(io::read_json(path)["k"], 1.5);
  io::write_file(path, "{not json");
  EXPECT_THROW(io::read_json(path), io::IoError);
  EXPECT_THROW(io::read_file((dir / "missing.csv").string()), io::IoError);
  std::filesystem::remove_all(dir);
}
