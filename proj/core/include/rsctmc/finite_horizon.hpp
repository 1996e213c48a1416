#pragma once

#include <optional>
#include <vector>

#include "rsctmc/model.hpp"

namespace rsctmc {

/*
 * Finite-horizon exponential value function on a uniform backward grid.
 *
 * phi solves, backward from phi(T,i) = exp(theta g(i)),
 *
 *   d phi/dt (t,i) + min_{u in U_i} [ theta c(t,i,u) phi(t,i)
 *                                     + sum_j lambda_ij(u) phi(t,j) ] = 0,
 *
 * and psi = theta^{-1} log phi is the certainty-equivalent value. Since
 * c, g >= 0, every phi entry lies in [1, exp(theta (||c||(T-t) + ||g||))].
 */
struct ValueGrid {
    std::vector<double> times; // t_0 = 0 < ... < t_K = T
    Matrix phi;                // (K+1) x n
    Matrix psi;                // theta^{-1} log phi
    double theta = 0.0;
    double horizon = 0.0;
};

/// Action per (grid row, state), applied piecewise-constant on [t_k, t_{k+1}).
struct MarkovPolicy {
    std::vector<double> times;
    std::vector<std::vector<int>> action; // (K+1) x n

    int at(double t, int state) const;
};

struct FiniteSolution {
    ValueGrid grid;
    MarkovPolicy policy;
};

/// Backward classical RK4 with fixed step h = T/K.
///
/// `cost_multiplier`, when given, must have length K+1 and scales the running
/// cost piecewise-constantly: c(t,i,u) = mult[k] * c(i,u) on [t_k, t_{k+1})
/// (mult[K] only enters the terminal-row policy extraction). Throws
/// NumericalError if the stability guard h (2M + theta ||c||) < 1 fails or a
/// non-finite value appears; phi dipping below 1 by more than 1e-9 is an
/// error, smaller undershoots are clamped to 1.
FiniteSolution solve_finite_horizon(const CtmdpModel& model, double theta, double horizon,
                                    int steps,
                                    const std::vector<double>* cost_multiplier = nullptr);

/// Independent cross-check: Picard iteration on the integral form
///   phi(t,i) = e^{theta g(i)} + int_t^T min_u[...] ds
/// discretized with the composite trapezoid rule on the same grid, iterated
/// from phi = e^{theta g} until the sup-norm change drops below 1e-10. The
/// iteration inherits a contraction factor beta = (2M + theta||c||) / gamma0
/// with gamma0 = 2M + theta||c|| + 1 from the exponentially weighted norm, so
/// failure to converge within ceil(log tol / log beta) + 50 sweeps signals a
/// discretization bug and throws NumericalError.
ValueGrid picard_solve(const CtmdpModel& model, double theta, double horizon, int steps);

/// Minimizing action per grid point; ties to the lowest action index.
MarkovPolicy extract_policy(const CtmdpModel& model, double theta, const ValueGrid& grid);

/// Max over interior grid points of |central-difference d phi/dt + min_u[...]|.
double hjb_residual(const CtmdpModel& model, double theta, const ValueGrid& grid);

/// Fill psi = theta^{-1} log phi. Throws NumericalError if phi < 1 - 1e-9
/// anywhere (an upstream solver violation).
ValueGrid log_value(ValueGrid grid);

}  // namespace rsctmc
