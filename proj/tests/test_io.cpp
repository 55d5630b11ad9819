#include "ddpred/io.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "test_util.hpp"

namespace ddpred {
namespace {

namespace fs = std::filesystem;
using testutil::random_matrix;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ddpred_io_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }
  void write_file(const std::string& name, const std::string& text) const {
    std::ofstream out(path(name));
    out << text;
  }

  fs::path dir_;
};

TEST_F(IoTest, DoubleFormattingRoundTripsExactly) {
  const double cases[] = {0.0,   -0.0,       1.0,        0.1,
                          1.0 / 3.0,         1e-308,     -2.5e17,
                          3.141592653589793, 1e-15,      123456789.0};
  for (double v : cases) {
    const std::string s = io::format_double(v);
    EXPECT_EQ(io::parse_double(s), v) << s;
  }
  EXPECT_THROW(io::parse_double(""), io::ParseError);
  EXPECT_THROW(io::parse_double("1.5x"), io::ParseError);
  EXPECT_THROW(io::parse_double(" 1.5"), io::ParseError);
}

TEST_F(IoTest, TrajectoryRoundTrip) {
  rng::Stream st(60);
  lti::Trajectory traj;
  traj.u = random_matrix(2, 15, st);
  traj.y = random_matrix(3, 15, st);
  io::write_trajectory_csv(path("t.csv"), traj);
  const auto back = io::read_trajectory_csv(path("t.csv"));
  EXPECT_EQ(back.u.rows(), 2);
  EXPECT_EQ(back.y.rows(), 3);
  EXPECT_EQ((back.u - traj.u).norm(), 0.0);
  EXPECT_EQ((back.y - traj.y).norm(), 0.0);
}

TEST_F(IoTest, TrajectoryParseErrorsCarryLineNumbers) {
  write_file("bad_header.csv", "time,u1,y1\n0,1,2\n");
  EXPECT_THROW(io::read_trajectory_csv(path("bad_header.csv")),
               io::ParseError);

  write_file("bad_t.csv", "t,u1,y1\n0,1,2\n2,1,2\n");
  try {
    io::read_trajectory_csv(path("bad_t.csv"));
    FAIL() << "expected a parse error";
  } catch (const io::ParseError& err) {
    // Messages use the compiler-style "path:line:" prefix.
    EXPECT_NE(std::string(err.what()).find(":3:"), std::string::npos)
        << err.what();
  }

  write_file("ragged.csv", "t,u1,y1\n0,1\n");
  EXPECT_THROW(io::read_trajectory_csv(path("ragged.csv")), io::ParseError);

  EXPECT_THROW(io::read_trajectory_csv(path("missing.csv")),
               std::runtime_error);
}

TEST_F(IoTest, OnlineWindowRoundTrip) {
  hankel::OnlineWindow win;
  win.u_ini = Vector::LinSpaced(4, 1, 4);   // m=2, Tp=2
  win.u_pred = Vector::LinSpaced(2, 5, 6);  // Tf=1
  win.y_ini = Vector::LinSpaced(2, 7, 8);   // p=1
  io::write_online_csv(path("w.csv"), win, 2, 1);
  const auto back = io::read_online_csv(path("w.csv"));
  EXPECT_EQ((back.u_ini - win.u_ini).norm(), 0.0);
  EXPECT_EQ((back.u_pred - win.u_pred).norm(), 0.0);
  EXPECT_EQ((back.y_ini - win.y_ini).norm(), 0.0);

  // Future outputs must form an uninterrupted prefix of known values.
  write_file("gap.csv", "t,u1,y1\n0,1,\n1,2,3\n");
  EXPECT_THROW(io::read_online_csv(path("gap.csv")), io::ParseError);
}

TEST_F(IoTest, SystemRoundTrip) {
  const auto sys = lti::random_stable_system(2, 1, 2, 61);
  io::write_system_csv(path("s.csv"), sys);
  const auto back = io::read_system_csv(path("s.csv"));
  EXPECT_EQ((back.A - sys.A).norm(), 0.0);
  EXPECT_EQ((back.B - sys.B).norm(), 0.0);
  EXPECT_EQ((back.C - sys.C).norm(), 0.0);
  EXPECT_EQ((back.D - sys.D).norm(), 0.0);
}

TEST_F(IoTest, VectorRoundTrip) {
  Vector v = Vector::LinSpaced(5, -2, 2);
  v(2) = 1.0 / 3.0;
  io::write_vector_csv(path("v.csv"), v, "y_pred");
  const auto back = io::read_vector_csv(path("v.csv"));
  EXPECT_EQ((back - v).norm(), 0.0);
}

TEST_F(IoTest, RecordsRoundTripWithOptionals) {
  std::vector<montecarlo::ScenarioRecord> records;
  montecarlo::ScenarioRecord full;
  full.system_id = 3;
  full.n = 2;
  full.m = 1;
  full.p = 2;
  full.Tp = 1;
  full.Tf = 2;
  full.N = 1e-5;
  full.realization = 7;
  full.err_raw = 0.125;
  full.err_tsvd = 1.0 / 3.0;
  full.norm_ypred = 2.5;
  full.bound1 = 0.5;
  full.bound2 = 0.75;
  full.delta_sn_raw = 1.25;
  full.delta_sn_tsvd = 1.5;
  full.relgap1 = 15.0;
  full.relgap2 = 16.5;
  full.tsvd_improved = true;
  records.push_back(full);

  montecarlo::ScenarioRecord sparse;
  sparse.system_id = 4;
  sparse.n = 1;
  sparse.m = 1;
  sparse.p = 1;
  sparse.Tp = 2;
  sparse.Tf = 1;
  sparse.N = 1e-4;
  sparse.err_raw = 0.1;
  sparse.err_tsvd = 0.2;
  sparse.norm_ypred = 1.0;
  records.push_back(sparse);

  io::write_records_csv(path("r.csv"), records);
  const auto back = io::read_records_csv(path("r.csv"));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].system_id, 3);
  EXPECT_EQ(back[0].err_tsvd, full.err_tsvd);
  ASSERT_TRUE(back[0].bound2.has_value());
  EXPECT_EQ(*back[0].bound2, 0.75);
  EXPECT_TRUE(back[0].tsvd_improved);
  EXPECT_FALSE(back[1].bound1.has_value());
  EXPECT_FALSE(back[1].relgap2.has_value());
  EXPECT_FALSE(back[1].tsvd_improved);
}

TEST_F(IoTest, RecordsApplicabilityColumnsMustMatch) {
  std::vector<montecarlo::ScenarioRecord> records(1);
  records[0].N = 1e-5;
  records[0].norm_ypred = 1.0;
  io::write_records_csv(path("r.csv"), records);

  // Flip applicable1 to 1 while bound1 stays empty.
  std::ifstream in(path("r.csv"));
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  in.close();
  row[row.size() - 3] = '1';
  write_file("broken.csv", header + "\n" + row + "\n");
  EXPECT_THROW(io::read_records_csv(path("broken.csv")), io::ParseError);
}

TEST_F(IoTest, SummaryLayout) {
  std::vector<montecarlo::ScenarioRecord> records;
  for (double N : {1e-6, 1e-5}) {
    for (int i = 0; i < 3; ++i) {
      montecarlo::ScenarioRecord rec;
      rec.N = N;
      rec.norm_ypred = 1.0;
      rec.bound1 = 2.0 * N;
      rec.relgap1 = 10.0 + i;
      records.push_back(rec);
    }
  }
  io::write_summary_csv(path("sum.csv"), montecarlo::summarize(records));

  std::ifstream in(path("sum.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("N,count,applicable1,applicable2,", 0), 0u) << line;
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      ++rows;
      last = line;
    }
  }
  // Two level rows plus the trailing global row with an empty N cell.
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(last.front(), ',');
}

TEST_F(IoTest, WriteErrorsSurfaceAsExceptions) {
  lti::Trajectory traj;
  traj.u = Matrix::Ones(1, 2);
  traj.y = Matrix::Ones(1, 2);
  EXPECT_THROW(
      io::write_trajectory_csv((dir_ / "nodir" / "t.csv").string(), traj),
      std::runtime_error);
}

}  // namespace
}  // namespace ddpred
