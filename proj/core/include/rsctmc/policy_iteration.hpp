#pragma once

#include <vector>

#include "rsctmc/average_eigen.hpp"
#include "rsctmc/model.hpp"

namespace rsctmc {

/*
 * Policy improvement for the average cost criterion: evaluate the current
 * stationary policy through the multiplicative Poisson equation, then replace
 * each state's action by the minimizer of theta c(i,u) h(i) + sum_j
 * lambda_ij(u) h(j). The growth rate decreases strictly until the minimizing
 * policy repeats, which happens after finitely many steps because the policy
 * set is finite.
 */
struct AverageSolution {
    double rho_star = 0.0;
    StationaryPolicy policy;
    std::vector<double> h; // eigenfunction of the final policy, h(0) = 1
    double eigen_residual = 0.0;
    double acdpe_residual = 0.0; // residual of the average-cost optimality equation
    int eigen_iterations = 0;
    std::vector<std::pair<StationaryPolicy, double>> trace; // (policy, rho) per iteration
};

/// One improvement step given a positive h; ties to the lowest action index.
StationaryPolicy improve(const CtmdpModel& model, double theta, const std::vector<double>& h);

/// Full policy iteration from `initial`. Stops when the improved policy
/// repeats or when the improvement leaves every state's minimized value equal
/// to the current policy's value within 1e-10 relative. Throws NumericalError
/// if rho ever increases by more than 1e-10 between iterations or the
/// iteration count exceeds the number of stationary policies, and
/// ValidationError if a reducible policy is encountered.
AverageSolution policy_iteration(const CtmdpModel& model, double theta, StationaryPolicy initial);

struct BruteForceEntry {
    StationaryPolicy policy;
    double rho;
};

struct BruteForceResult {
    double rho_star = 0.0;
    StationaryPolicy policy; // lexicographically smallest among rho ties
    std::vector<BruteForceEntry> table;
    std::vector<StationaryPolicy> reducible_skipped;
};

/// Evaluate every stationary policy (guard: at most 10^6) and return the
/// minimizer together with the full table. Reducible policies are skipped and
/// reported, not fatal.
BruteForceResult brute_force_average(const CtmdpModel& model, double theta);

/// max_i | theta rho h(i) - min_u [ theta c(i,u) h(i) + sum_j lambda_ij(u) h(j) ] |.
double acdpe_residual(const CtmdpModel& model, double theta, double rho,
                      const std::vector<double>& h);

}  // namespace rsctmc
