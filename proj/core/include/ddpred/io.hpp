#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ddpred/hankel.hpp"
#include "ddpred/lti.hpp"
#include "ddpred/montecarlo.hpp"
#include "ddpred/types.hpp"

namespace ddpred::io {

/// Malformed file content; the message carries file and line context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// Strict full-string parse; throws ParseError on anything else.
double parse_double(const std::string& text);

/// Trajectory files: header `t,u1..um,y1..yp`, one row per time step.
void write_trajectory_csv(const std::string& path, const lti::Trajectory& traj);
lti::Trajectory read_trajectory_csv(const std::string& path);

/// Online-window files share the trajectory layout with T = Tp + Tf
/// rows; future outputs are unknown, so y cells are empty for t >= Tp.
void write_online_csv(const std::string& path, const hankel::OnlineWindow& win,
                      Index m, Index p);
hankel::OnlineWindow read_online_csv(const std::string& path);

/// State-space sidecar: a `dims` block (n, m, p) followed by labelled
/// A, B, C, D blocks, one matrix row per line.
void write_system_csv(const std::string& path, const lti::StateSpace& sys);
lti::StateSpace read_system_csv(const std::string& path);

/// Single named column of doubles.
void write_vector_csv(const std::string& path, const Vector& v,
                      const std::string& column);
Vector read_vector_csv(const std::string& path);

/// Scenario records; optional fields serialize as empty cells, and the
/// two applicability columns mirror the presence of the bound totals.
void write_records_csv(const std::string& path,
                       const std::vector<montecarlo::ScenarioRecord>& records);
std::vector<montecarlo::ScenarioRecord> read_records_csv(
    const std::string& path);

/// Per-level aggregate rows plus a trailing global row (empty N cell).
void write_summary_csv(const std::string& path,
                       const montecarlo::AggregateStats& stats);

}  // namespace ddpred::io
