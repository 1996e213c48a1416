#pragma once

#include <vector>

#include "rsctmc/model.hpp"

namespace rsctmc {

/*
 * Discounted-cost exponential value W(theta, i), solved as an ODE in the risk
 * parameter:
 *
 *   alpha theta dW/dtheta (theta,i)
 *       = min_{u in U_i} [ theta c(i,u) W(theta,i) + sum_j lambda_ij(u) W(theta,j) ],
 *
 * integrated forward in theta from the boundary W(eps, i) = exp(eps ||c|| / alpha),
 * which is state independent. The equation is singular at theta = 0, so the
 * solve never goes below eps; the eps -> 0 limit is studied by re-solving on a
 * decreasing eps sequence and checking the Cauchy gaps shrink.
 */
struct DiscountedSolution {
    double alpha = 0.0;
    double eps = 0.0;
    std::vector<double> theta_grid;       // eps = theta_0 < ... < theta_L < 1
    Matrix W;                             // (L+1) x n
    std::vector<std::vector<int>> policy; // minimizer per (theta_k, i)
    Matrix Valpha;                        // theta^{-1} log W
    std::vector<double> cauchy_gaps;      // filled by solve_limit
};

/// Forward fixed-step RK4 on a uniform theta grid. Throws NumericalError if
/// the step guard h_theta (||c|| + 2M/eps) / alpha < 1 fails or a value goes
/// non-finite; the boundary row is written as exp(eps ||c|| / alpha) exactly.
DiscountedSolution solve_eps(const CtmdpModel& model, double alpha, double eps, double theta_max,
                             int steps);

/// Runs solve_eps for every eps in the strictly decreasing, roughly halving
/// sequence, reports sup-norm gaps between consecutive solutions over the
/// common range theta >= eps_sequence.front() (linear interpolation on a
/// uniform probe grid), and returns the finest-eps solution restricted to
/// that range. Throws NumericalError if the gap sequence is not decreasing.
DiscountedSolution solve_limit(const CtmdpModel& model, double alpha, double theta_max, int steps,
                               const std::vector<double>& eps_sequence);

struct DiscountedValueReport {
    Matrix v_alpha;                   // theta^{-1} log W over the solution grid
    double theta_row = 0.0;           // smallest theta row of the solution
    std::vector<double> v_at_row;     // V_alpha at that row
    std::vector<double> risk_neutral; // optimal risk-neutral discounted value
    double max_abs_gap = 0.0;         // max_i |v_at_row - risk_neutral|
};

/// V_alpha = theta^{-1} log W, plus the comparison of the smallest theta row
/// against the risk-neutral discounted value obtained by enumerating
/// stationary policies and solving (alpha I - Lambda_u) v = c_u directly.
/// Throws NumericalError if W < 1 - 1e-9 anywhere.
DiscountedValueReport discounted_value(const CtmdpModel& model, const DiscountedSolution& sol);

/// Linear interpolation of W(theta, state), clamped to the grid range.
double interp_W(const DiscountedSolution& sol, double theta, int state);

struct PolicyLookup {
    std::vector<int> action;  // per state
    double theta_query = 0.0; // theta e^{-alpha t}
    double theta_used = 0.0;  // nearest grid point
    double spacing = 0.0;
};

/// Policy row nearest theta e^{-alpha t}. Actions are discrete and the
/// minimizer is piecewise-constant in theta, so nearest-point lookup rather
/// than interpolation. Throws ValidationError if theta e^{-alpha t} falls
/// below sol.eps (the solution is not defined there).
PolicyLookup discounted_policy_at_time(const DiscountedSolution& sol, double theta, double t);

}  // namespace rsctmc
