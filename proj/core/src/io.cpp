#include "ddpred/io.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <system_error>

namespace ddpred::io {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += cells[i];
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path), in_(path) {
    if (!in_.is_open()) {
      throw std::runtime_error("cannot open for reading: " + path);
    }
  }

  std::optional<std::string> next() {
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::string require(const std::string& what) {
    auto line = next();
    if (!line) fail(path_, line_ + 1, "unexpected end of file, expected " + what);
    return *line;
  }

  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

class FileWriter {
 public:
  explicit FileWriter(const std::string& path) : path_(path), out_(path) {
    if (!out_.is_open()) {
      throw std::runtime_error("cannot open for writing: " + path);
    }
  }

  void row(const std::vector<std::string>& cells) {
    out_ << join(cells) << '\n';
  }

  void raw(const std::string& line) { out_ << line << '\n'; }

  ~FileWriter() noexcept(false) {
    out_.flush();
    if (!out_.good() && !std::uncaught_exceptions()) {
      throw std::runtime_error("write failed: " + path_);
    }
  }

 private:
  std::string path_;
  std::ofstream out_;
};

double parse_double_at(const std::string& cell, const std::string& path,
                       std::size_t line) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end || cell.empty()) {
    fail(path, line, "expected a real number, got '" + cell + "'");
  }
  return value;
}

long long parse_int_at(const std::string& cell, const std::string& path,
                       std::size_t line) {
  long long value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end || cell.empty()) {
    fail(path, line, "expected an integer, got '" + cell + "'");
  }
  return value;
}

std::string opt_cell(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

std::optional<double> parse_opt_at(const std::string& cell,
                                   const std::string& path,
                                   std::size_t line) {
  if (cell.empty()) return std::nullopt;
  return parse_double_at(cell, path, line);
}

// Header `t,u1..um,y1..yp`; returns (m, p).
std::pair<Index, Index> parse_signal_header(const std::string& header,
                                            const std::string& path,
                                            std::size_t line) {
  const auto cells = split(header);
  if (cells.empty() || cells[0] != "t") {
    fail(path, line, "header must start with column 't'");
  }
  Index m = 0, p = 0;
  std::size_t i = 1;
  for (; i < cells.size() && cells[i] == "u" + std::to_string(m + 1); ++i) ++m;
  for (; i < cells.size() && cells[i] == "y" + std::to_string(p + 1); ++i) ++p;
  if (i != cells.size() || m == 0 || p == 0) {
    fail(path, line, "header must be t,u1..um,y1..yp");
  }
  return {m, p};
}

std::vector<std::string> signal_header(Index m, Index p) {
  std::vector<std::string> cells{"t"};
  for (Index i = 1; i <= m; ++i) cells.push_back("u" + std::to_string(i));
  for (Index i = 1; i <= p; ++i) cells.push_back("y" + std::to_string(i));
  return cells;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  return parse_double_at(text, "<string>", 0);
}

void write_trajectory_csv(const std::string& path,
                          const lti::Trajectory& traj) {
  if (traj.u.cols() != traj.y.cols()) {
    throw std::invalid_argument("input and output lengths differ");
  }
  FileWriter out(path);
  out.row(signal_header(traj.u.rows(), traj.y.rows()));
  for (Index t = 0; t < traj.u.cols(); ++t) {
    std::vector<std::string> cells{std::to_string(t)};
    for (Index i = 0; i < traj.u.rows(); ++i) {
      cells.push_back(format_double(traj.u(i, t)));
    }
    for (Index i = 0; i < traj.y.rows(); ++i) {
      cells.push_back(format_double(traj.y(i, t)));
    }
    out.row(cells);
  }
}

lti::Trajectory read_trajectory_csv(const std::string& path) {
  LineReader in(path);
  const auto [m, p] = parse_signal_header(in.require("header"), path, 1);
  std::vector<std::vector<double>> rows;
  while (auto line = in.next()) {
    if (line->empty()) fail(path, in.line(), "blank line");
    const auto cells = split(*line);
    if (static_cast<Index>(cells.size()) != 1 + m + p) {
      fail(path, in.line(), "wrong cell count");
    }
    if (parse_int_at(cells[0], path, in.line()) !=
        static_cast<long long>(rows.size())) {
      fail(path, in.line(), "time index out of sequence");
    }
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      row.push_back(parse_double_at(cells[i], path, in.line()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(path, in.line() + 1, "no data rows");
  lti::Trajectory traj;
  const auto L = static_cast<Index>(rows.size());
  traj.u.resize(m, L);
  traj.y.resize(p, L);
  for (Index t = 0; t < L; ++t) {
    const auto& row = rows[static_cast<std::size_t>(t)];
    for (Index i = 0; i < m; ++i) traj.u(i, t) = row[static_cast<std::size_t>(i)];
    for (Index i = 0; i < p; ++i) {
      traj.y(i, t) = row[static_cast<std::size_t>(m + i)];
    }
  }
  return traj;
}

void write_online_csv(const std::string& path, const hankel::OnlineWindow& win,
                      Index m, Index p) {
  if (m < 1 || p < 1) throw std::invalid_argument("m and p must be positive");
  if (win.u_ini.size() % m != 0 || win.u_pred.size() % m != 0 ||
      win.y_ini.size() % p != 0) {
    throw std::invalid_argument("window lengths do not match m and p");
  }
  const Index Tp = win.u_ini.size() / m;
  const Index Tf = win.u_pred.size() / m;
  if (win.y_ini.size() / p != Tp) {
    throw std::invalid_argument("past input and output horizons differ");
  }
  FileWriter out(path);
  out.row(signal_header(m, p));
  for (Index t = 0; t < Tp + Tf; ++t) {
    std::vector<std::string> cells{std::to_string(t)};
    for (Index i = 0; i < m; ++i) {
      const double u = t < Tp ? win.u_ini(t * m + i)
                              : win.u_pred((t - Tp) * m + i);
      cells.push_back(format_double(u));
    }
    for (Index i = 0; i < p; ++i) {
      cells.push_back(t < Tp ? format_double(win.y_ini(t * p + i))
                             : std::string());
    }
    out.row(cells);
  }
}

hankel::OnlineWindow read_online_csv(const std::string& path) {
  LineReader in(path);
  const auto [m, p] = parse_signal_header(in.require("header"), path, 1);
  std::vector<double> u_flat;
  std::vector<double> y_flat;
  Index T = 0;
  Index Tp = -1;  // set at the first empty-output row
  while (auto line = in.next()) {
    if (line->empty()) fail(path, in.line(), "blank line");
    const auto cells = split(*line);
    if (static_cast<Index>(cells.size()) != 1 + m + p) {
      fail(path, in.line(), "wrong cell count");
    }
    if (parse_int_at(cells[0], path, in.line()) != T) {
      fail(path, in.line(), "time index out of sequence");
    }
    for (Index i = 0; i < m; ++i) {
      u_flat.push_back(
          parse_double_at(cells[static_cast<std::size_t>(1 + i)], path,
                          in.line()));
    }
    const bool has_y = !cells[static_cast<std::size_t>(1 + m)].empty();
    for (Index i = 0; i < p; ++i) {
      const auto& cell = cells[static_cast<std::size_t>(1 + m + i)];
      if (cell.empty() != !has_y) {
        fail(path, in.line(), "output cells must be all present or all empty");
      }
      if (has_y) y_flat.push_back(parse_double_at(cell, path, in.line()));
    }
    if (has_y) {
      if (Tp >= 0) fail(path, in.line(), "output rows must form a prefix");
    } else if (Tp < 0) {
      Tp = T;
    }
    ++T;
  }
  if (Tp < 0) fail(path, in.line() + 1, "no future rows (horizon exhausted)");
  if (Tp == 0) fail(path, in.line() + 1, "no past rows");
  hankel::OnlineWindow win;
  win.u_ini = Eigen::Map<const Vector>(u_flat.data(), Tp * m);
  win.u_pred = Eigen::Map<const Vector>(u_flat.data() + Tp * m, (T - Tp) * m);
  win.y_ini = Eigen::Map<const Vector>(y_flat.data(), Tp * p);
  return win;
}

void write_system_csv(const std::string& path, const lti::StateSpace& sys) {
  lti::validate_dimensions(sys);
  FileWriter out(path);
  out.raw("block,rows,cols");
  const auto block = [&](const char* name, const Matrix& a) {
    out.row({name, std::to_string(a.rows()), std::to_string(a.cols())});
    for (Index i = 0; i < a.rows(); ++i) {
      std::vector<std::string> cells;
      for (Index j = 0; j < a.cols(); ++j) {
        cells.push_back(format_double(a(i, j)));
      }
      out.row(cells);
    }
  };
  block("A", sys.A);
  block("B", sys.B);
  block("C", sys.C);
  block("D", sys.D);
}

lti::StateSpace read_system_csv(const std::string& path) {
  LineReader in(path);
  if (in.require("header") != "block,rows,cols") {
    fail(path, 1, "expected header block,rows,cols");
  }
  const auto read_block = [&](const std::string& name) {
    const auto head = split(in.require("block " + name));
    if (head.size() != 3 || head[0] != name) {
      fail(path, in.line(), "expected block " + name);
    }
    const auto rows = parse_int_at(head[1], path, in.line());
    const auto cols = parse_int_at(head[2], path, in.line());
    if (rows < 1 || cols < 1) fail(path, in.line(), "empty block");
    Matrix a(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      const auto cells = split(in.require("matrix row"));
      if (static_cast<Index>(cells.size()) != cols) {
        fail(path, in.line(), "wrong cell count");
      }
      for (Index j = 0; j < cols; ++j) {
        a(i, j) = parse_double_at(cells[static_cast<std::size_t>(j)], path,
                                  in.line());
      }
    }
    return a;
  };
  lti::StateSpace sys;
  sys.A = read_block("A");
  sys.B = read_block("B");
  sys.C = read_block("C");
  sys.D = read_block("D");
  if (auto extra = in.next()) {
    if (!extra->empty()) fail(path, in.line(), "trailing content");
  }
  try {
    lti::validate_dimensions(sys);
  } catch (const std::invalid_argument& err) {
    fail(path, in.line(), err.what());
  }
  return sys;
}

void write_vector_csv(const std::string& path, const Vector& v,
                      const std::string& column) {
  FileWriter out(path);
  out.raw(column);
  for (Index i = 0; i < v.size(); ++i) out.raw(format_double(v(i)));
}

Vector read_vector_csv(const std::string& path) {
  LineReader in(path);
  in.require("header");
  std::vector<double> values;
  while (auto line = in.next()) {
    if (line->empty()) fail(path, in.line(), "blank line");
    values.push_back(parse_double_at(*line, path, in.line()));
  }
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Index>(values.size()));
}

namespace {

const char* kRecordsHeader =
    "system_id,n,m,p,Tp,Tf,N,realization,err_raw,err_tsvd,norm_ypred,bound1,"
    "bound2,delta_sn_raw,delta_sn_tsvd,relgap1,relgap2,tsvd_improved,"
    "applicable1,applicable2";

}  // namespace

void write_records_csv(
    const std::string& path,
    const std::vector<montecarlo::ScenarioRecord>& records) {
  FileWriter out(path);
  out.raw(kRecordsHeader);
  for (const auto& rec : records) {
    out.row({std::to_string(rec.system_id), std::to_string(rec.n),
             std::to_string(rec.m), std::to_string(rec.p),
             std::to_string(rec.Tp), std::to_string(rec.Tf),
             format_double(rec.N), std::to_string(rec.realization),
             format_double(rec.err_raw), format_double(rec.err_tsvd),
             format_double(rec.norm_ypred), opt_cell(rec.bound1),
             opt_cell(rec.bound2), opt_cell(rec.delta_sn_raw),
             opt_cell(rec.delta_sn_tsvd), opt_cell(rec.relgap1),
             opt_cell(rec.relgap2), rec.tsvd_improved ? "1" : "0",
             rec.bound1 ? "1" : "0", rec.bound2 ? "1" : "0"});
  }
}

std::vector<montecarlo::ScenarioRecord> read_records_csv(
    const std::string& path) {
  LineReader in(path);
  if (in.require("header") != kRecordsHeader) {
    fail(path, 1, "unexpected records header");
  }
  std::vector<montecarlo::ScenarioRecord> records;
  while (auto line = in.next()) {
    if (line->empty()) fail(path, in.line(), "blank line");
    const auto cells = split(*line);
    if (cells.size() != 20) fail(path, in.line(), "wrong cell count");
    montecarlo::ScenarioRecord rec;
    const auto num = in.line();
    rec.system_id = parse_int_at(cells[0], path, num);
    rec.n = parse_int_at(cells[1], path, num);
    rec.m = parse_int_at(cells[2], path, num);
    rec.p = parse_int_at(cells[3], path, num);
    rec.Tp = parse_int_at(cells[4], path, num);
    rec.Tf = parse_int_at(cells[5], path, num);
    rec.N = parse_double_at(cells[6], path, num);
    rec.realization = parse_int_at(cells[7], path, num);
    rec.err_raw = parse_double_at(cells[8], path, num);
    rec.err_tsvd = parse_double_at(cells[9], path, num);
    rec.norm_ypred = parse_double_at(cells[10], path, num);
    rec.bound1 = parse_opt_at(cells[11], path, num);
    rec.bound2 = parse_opt_at(cells[12], path, num);
    rec.delta_sn_raw = parse_opt_at(cells[13], path, num);
    rec.delta_sn_tsvd = parse_opt_at(cells[14], path, num);
    rec.relgap1 = parse_opt_at(cells[15], path, num);
    rec.relgap2 = parse_opt_at(cells[16], path, num);
    const auto flag = [&](const std::string& cell) {
      if (cell == "1") return true;
      if (cell == "0") return false;
      fail(path, num, "expected 0 or 1, got '" + cell + "'");
    };
    rec.tsvd_improved = flag(cells[17]);
    if (flag(cells[18]) != rec.bound1.has_value() ||
        flag(cells[19]) != rec.bound2.has_value()) {
      fail(path, num, "applicability flags disagree with bound cells");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_summary_csv(const std::string& path,
                       const montecarlo::AggregateStats& stats) {
  FileWriter out(path);
  out.raw(
      "N,count,applicable1,applicable2,mean_bound1,mean_bound2,max_relgap1,"
      "max_relgap2,median_relgap1,median_relgap2,relgap1_q1,relgap1_q3,"
      "relgap1_whisker_lo,relgap1_whisker_hi,relgap1_outliers,relgap2_q1,"
      "relgap2_q3,relgap2_whisker_lo,relgap2_whisker_hi,relgap2_outliers,"
      "tsvd_improved_fraction,slope_bound1,slope_bound2");
  const auto box_cells = [](const std::optional<montecarlo::BoxStats>& box) {
    if (!box) return std::vector<std::string>(5);
    return std::vector<std::string>{
        format_double(box->q1), format_double(box->q3),
        format_double(box->lo_whisker), format_double(box->hi_whisker),
        std::to_string(box->outlier_count)};
  };
  Index total = 0, total1 = 0, total2 = 0;
  for (const auto& level : stats.levels) {
    total += level.count;
    total1 += level.applicable1;
    total2 += level.applicable2;
    std::vector<std::string> cells{
        format_double(level.N),          std::to_string(level.count),
        std::to_string(level.applicable1), std::to_string(level.applicable2),
        opt_cell(level.mean_bound1),     opt_cell(level.mean_bound2),
        opt_cell(level.max_relgap1),     opt_cell(level.max_relgap2),
        opt_cell(level.median_relgap1),  opt_cell(level.median_relgap2)};
    for (const auto& cell : box_cells(level.relgap1_box)) cells.push_back(cell);
    for (const auto& cell : box_cells(level.relgap2_box)) cells.push_back(cell);
    cells.insert(cells.end(), {"", "", ""});
    out.row(cells);
  }
  std::vector<std::string> globals{
      "", std::to_string(total), std::to_string(total1), std::to_string(total2)};
  globals.resize(20);
  globals.push_back(format_double(stats.tsvd_improved_fraction));
  globals.push_back(opt_cell(stats.slope_bound1));
  globals.push_back(opt_cell(stats.slope_bound2));
  out.row(globals);
}

}  // namespace ddpred::io
