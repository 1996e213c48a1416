#pragma once

#include <vector>

#include "rsctmc/model.hpp"

namespace rsctmc {

/*
 * Risk-sensitive average cost of a stationary policy.
 *
 * For a fixed policy u the growth rate rho satisfies the multiplicative
 * Poisson equation
 *
 *   sum_j lambda_ij(u(i)) h(j) + theta c(i,u(i)) h(i) = theta rho h(i),
 *
 * i.e. theta rho is the principal (Perron) eigenvalue of the Metzler matrix
 * Lambda_u + theta diag(c_u) and h is its positive eigenfunction, normalized
 * to h(0) = 1. Perron theory applies because the matrix is irreducible; a
 * reducible policy is rejected rather than silently evaluated.
 */
struct PolicyEvaluation {
    double rho = 0.0;       // growth rate, in cost units
    std::vector<double> h;  // positive eigenfunction, h(0) = 1
    double residual = 0.0;  // max_i |(Lambda_u + theta c) h - theta rho h|
    int iterations = 0;
};

/// Drift certificate: e^{-V(i)} sum_j lambda_ij(u) e^{V(j)} <= -delta W(i) + b 1_{i=0}
/// for every state and action, with W >= 1 and delta > 0.
struct LyapunovCertificate {
    std::vector<double> V;
    std::vector<double> drift_weight;
    double delta = 0.0;
    double b = 0.0;
};

struct LyapunovReport {
    Matrix margins;      // [i][a], RHS - LHS; certificate holds iff all >= 0
    bool holds = false;
    double max_theta = 0.0; // largest theta with theta ||c|| < delta (inf if c == 0)
};

/// A[i][j] = lambda_ij(u(i)) + theta c(i,u(i)) [i == j]. Off-diagonals >= 0.
Matrix twisted_generator(const CtmdpModel& model, const StationaryPolicy& policy, double theta);

/// Perron root and positive eigenvector of an irreducible Metzler matrix by
/// shifted power iteration: B = A + sigma I with sigma = max_i(-A[i][i]) + 1
/// makes B nonnegative with positive diagonal, so the iteration converges to
/// the Perron pair. Convergence is on the eigenvector (1-norm change < 1e-12)
/// because h feeds policy improvement and needs full accuracy. Returns
/// rho = (perron(B) - sigma)/theta and h = v / v[0].
PolicyEvaluation principal_eigen(const Matrix& A, double theta);

/// Assemble the twisted generator for (model, policy), reject reducible
/// policies, and run principal_eigen.
PolicyEvaluation evaluate_policy(const CtmdpModel& model, const StationaryPolicy& policy,
                                 double theta);

/// max_i |sum_j lambda_ij(u(i)) h(j) + theta c(i,u(i)) h(i) - theta rho h(i)|.
double poisson_residual(const CtmdpModel& model, const StationaryPolicy& policy, double theta,
                        const PolicyEvaluation& eval);

/// Evaluate the drift inequality for every (state, action). The left side is
/// computed as sum_j lambda_ij(u) e^{V(j)-V(i)} so only differences of V
/// enter; exponents above 700 would overflow and raise NumericalError.
LyapunovReport check_lyapunov(const CtmdpModel& model, const LyapunovCertificate& cert);

}  // namespace rsctmc
