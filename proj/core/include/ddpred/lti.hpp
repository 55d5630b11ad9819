#pragma once

#include <cstdint>

#include "ddpred/types.hpp"

namespace ddpred::lti {

/// Discrete-time state-space model x(t+1) = A x(t) + B u(t),
/// y(t) = C x(t) + D u(t).
struct StateSpace {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix C;  // p x n
  Matrix D;  // p x m

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  Index p() const { return C.rows(); }
};

/// Input-output record; one column per time step.
struct Trajectory {
  Matrix u;  // m x L
  Matrix y;  // p x L

  Index length() const { return u.cols(); }
};

/// Throws std::invalid_argument if the system matrices are dimensionally
/// inconsistent.
void validate_dimensions(const StateSpace& sys);

/// Simulates the response to input u (m x L) from initial state x0.
/// Returns the p x L output sequence.
Matrix simulate(const StateSpace& sys, const Vector& x0, const Matrix& u);

struct SimulationWithStates {
  Matrix y;  // p x L
  Matrix x;  // n x L, states x(0..L-1)
};

/// Same recursion as simulate() but also returns the visited states.
SimulationWithStates simulate_with_states(const StateSpace& sys, const Vector& x0,
                                          const Matrix& u);

/// Lag (observability index): smallest t with rank O_t = n. At most n.
/// Throws std::domain_error if (A, C) is unobservable.
Index lag(const StateSpace& sys);

/// Extended observability matrix O_t = col(C, CA, ..., CA^{t-1}), (p t) x n.
Matrix extended_observability(const StateSpace& sys, Index t);

/// Block lower-triangular Toeplitz of Markov parameters with D on the
/// diagonal and C A^{k-1} B below it, (p t) x (m t).
Matrix convolution_matrix(const StateSpace& sys, Index t);

/// Reachability block [A^{t-1} B ... A B  B], n x (m t).
Matrix reach_block(const StateSpace& sys, Index t);

/// Draws a stable, observable random system, deterministic in `seed`.
/// Eigenvalues are sampled as real values or conjugate pairs with
/// magnitude uniform on [0.1, 0.9]; B, C, D entries are uniform on
/// [-1, 1]. Unobservable draws are resampled up to `max_retries` times;
/// exhausting the budget throws GenerationError.
StateSpace random_stable_system(Index n, Index m, Index p, std::uint64_t seed,
                                int max_retries = 100);

}  // namespace ddpred::lti
