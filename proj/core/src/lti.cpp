#include "ddpred/lti.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "ddpred/numerics.hpp"
#include "ddpred/rng.hpp"

namespace ddpred::lti {

void validate_dimensions(const StateSpace& sys) {
  const Index n = sys.A.rows();
  const Index m = sys.B.cols();
  const Index p = sys.C.rows();
  if (n < 1 || m < 1 || p < 1) {
    throw std::invalid_argument("state-space dimensions must be positive");
  }
  if (sys.A.cols() != n) throw std::invalid_argument("A must be square");
  if (sys.B.rows() != n) throw std::invalid_argument("B must have n rows");
  if (sys.C.cols() != n) throw std::invalid_argument("C must have n columns");
  if (sys.D.rows() != p || sys.D.cols() != m) {
    throw std::invalid_argument("D must be p x m");
  }
}

namespace {

void check_sim_args(const StateSpace& sys, const Vector& x0, const Matrix& u) {
  validate_dimensions(sys);
  if (x0.size() != sys.n()) {
    throw std::invalid_argument("x0 length must equal the state dimension");
  }
  if (u.rows() != sys.m()) {
    throw std::invalid_argument("input must have m rows");
  }
  if (u.cols() < 1) {
    throw std::invalid_argument("input must have at least one column");
  }
}

}  // namespace

Matrix simulate(const StateSpace& sys, const Vector& x0, const Matrix& u) {
  check_sim_args(sys, x0, u);
  const Index L = u.cols();
  Matrix y(sys.p(), L);
  Vector x = x0;
  for (Index t = 0; t < L; ++t) {
    y.col(t) = sys.C * x + sys.D * u.col(t);
    x = sys.A * x + sys.B * u.col(t);
  }
  return y;
}

SimulationWithStates simulate_with_states(const StateSpace& sys, const Vector& x0,
                                          const Matrix& u) {
  check_sim_args(sys, x0, u);
  const Index L = u.cols();
  SimulationWithStates out;
  out.y.resize(sys.p(), L);
  out.x.resize(sys.n(), L);
  Vector x = x0;
  for (Index t = 0; t < L; ++t) {
    out.x.col(t) = x;
    out.y.col(t) = sys.C * x + sys.D * u.col(t);
    x = sys.A * x + sys.B * u.col(t);
  }
  return out;
}

Matrix extended_observability(const StateSpace& sys, Index t) {
  validate_dimensions(sys);
  if (t < 1) throw std::invalid_argument("block count must be positive");
  const Index n = sys.n();
  const Index p = sys.p();
  Matrix obs(p * t, n);
  Matrix power = sys.C;  // C A^k
  for (Index k = 0; k < t; ++k) {
    obs.middleRows(k * p, p) = power;
    if (k + 1 < t) power = power * sys.A;
  }
  return obs;
}

Index lag(const StateSpace& sys) {
  validate_dimensions(sys);
  const Index n = sys.n();
  for (Index t = 1; t <= n; ++t) {
    if (numerics::numerical_rank(extended_observability(sys, t)) == n) {
      return t;
    }
  }
  throw std::domain_error("(A, C) is unobservable; the lag is undefined");
}

Matrix convolution_matrix(const StateSpace& sys, Index t) {
  validate_dimensions(sys);
  if (t < 1) throw std::invalid_argument("block count must be positive");
  const Index m = sys.m();
  const Index p = sys.p();
  Matrix conv = Matrix::Zero(p * t, m * t);
  // Markov parameters D, CB, CAB, ...; block (i, j) holds the parameter
  // of order i - j.
  Matrix markov = sys.D;
  Matrix power = Matrix::Identity(sys.n(), sys.n());  // A^{order-1}
  for (Index order = 0; order < t; ++order) {
    for (Index j = 0; j + order < t; ++j) {
      conv.block((j + order) * p, j * m, p, m) = markov;
    }
    if (order + 1 < t) {
      markov = sys.C * power * sys.B;
      power = power * sys.A;
    }
  }
  return conv;
}

Matrix reach_block(const StateSpace& sys, Index t) {
  validate_dimensions(sys);
  if (t < 1) throw std::invalid_argument("block count must be positive");
  const Index n = sys.n();
  const Index m = sys.m();
  Matrix reach(n, m * t);
  Matrix power = sys.B;  // A^k B
  for (Index k = 0; k < t; ++k) {
    reach.middleCols((t - 1 - k) * m, m) = power;
    if (k + 1 < t) power = sys.A * power;
  }
  return reach;
}

namespace {

// Random orthogonal matrix via QR of a Gaussian draw, with the sign fix
// that makes the distribution
// rotation-invariant.
Matrix random_orthogonal(Index n, rng::Stream& stream) {
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) g(i, j) = stream.gaussian();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

// Block-diagonal real form with the requested spectrum: 1x1 blocks for
// real eigenvalues, 2x2 rotation-scaled blocks for conjugate pairs.
Matrix random_stable_dynamics(Index n, rng::Stream& stream) {
  Matrix d = Matrix::Zero(n, n);
  Index filled = 0;
  while (filled < n) {
    const bool pair = (n - filled >= 2) && (stream.uniform01() < 0.5);
    const double radius = stream.uniform(0.1, 0.9);
    if (pair) {
      const double angle = stream.uniform(0.0, 3.14159265358979323846);
      const double re = radius * std::cos(angle);
      const double im = radius * std::sin(angle);
      d(filled, filled) = re;
      d(filled, filled + 1) = im;
      d(filled + 1, filled) = -im;
      d(filled + 1, filled + 1) = re;
      filled += 2;
    } else {
      const double sign = stream.uniform01() < 0.5 ? -1.0 : 1.0;
      d(filled, filled) = sign * radius;
      filled += 1;
    }
  }
  const Matrix q = random_orthogonal(n, stream);
  return q * d * q.transpose();
}

Matrix random_uniform_matrix(Index rows, Index cols, rng::Stream& stream) {
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = stream.uniform(-1.0, 1.0);
  }
  return a;
}

bool observable(const StateSpace& sys) {
  return numerics::numerical_rank(extended_observability(sys, sys.n())) ==
         sys.n();
}

}  // namespace

StateSpace random_stable_system(Index n, Index m, Index p, std::uint64_t seed,
                                int max_retries) {
  if (n < 1 || m < 1 || p < 1) {
    throw std::invalid_argument("dimensions must be positive");
  }
  rng::Stream stream(seed);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    StateSpace sys;
    sys.A = random_stable_dynamics(n, stream);
    sys.B = random_uniform_matrix(n, m, stream);
    sys.C = random_uniform_matrix(p, n, stream);
    sys.D = random_uniform_matrix(p, m, stream);
    if (observable(sys)) return sys;
  }
  throw GenerationError("failed to draw an observable system after " +
                        std::to_string(max_retries + 1) + " attempts");
}

}  // namespace ddpred::lti
