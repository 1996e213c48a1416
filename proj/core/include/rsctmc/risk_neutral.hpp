#pragma once

#include <vector>

#include "rsctmc/model.hpp"

namespace rsctmc {

/// Stationary distribution of the chain under `policy` (requires
/// irreducibility; solved as pi Lambda = 0, sum pi = 1 by dense elimination).
std::vector<double> stationary_distribution(const CtmdpModel& model,
                                            const StationaryPolicy& policy);

/// Long-run average cost under `policy`: sum_i pi(i) c(i, u(i)).
double risk_neutral_average_cost(const CtmdpModel& model, const StationaryPolicy& policy);

/// Expected discounted cost under a fixed policy: (alpha I - Lambda_u) v = c_u.
std::vector<double> risk_neutral_discounted_fixed(const CtmdpModel& model,
                                                  const StationaryPolicy& policy, double alpha);

/// Optimal risk-neutral discounted value by enumerating every stationary
/// policy (guarded at 10^6 policies) and taking the pointwise minimum.
std::vector<double> risk_neutral_discounted_optimal(const CtmdpModel& model, double alpha);

/// Dense linear solve A x = b with partial pivoting; small systems only.
std::vector<double> solve_dense(Matrix A, std::vector<double> b);

}  // namespace rsctmc
