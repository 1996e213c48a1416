#pragma once

#include <span>

#include "rsctmc/model.hpp"

namespace rsctmc {

struct BellmanTerm {
    double value;
    int action;
};

/// min over u in U_i of [ theta * cost_scale * c(i,u) * v(i) + sum_j lambda_ij(u) v(j) ].
///
/// This single minimization drives the finite-horizon equation, the
/// theta-ODE of the discounted problem, the average-cost equation, and the
/// policy improvement step. Ties go to the lowest action index so policies
/// are identical across runs and platforms.
inline BellmanTerm bellman_min(const CtmdpModel& model, double theta,
                               std::span<const double> values, int i,
                               double cost_scale = 1.0) {
    BellmanTerm best{0.0, -1};
    for (int a = 0; a < model.num_actions(i); ++a) {
        double term = theta * cost_scale * model.cost[i][a] * values[i];
        const auto& row = model.rates[i][a];
        for (int j = 0; j < model.n; ++j) term += row[j] * values[j];
        if (best.action < 0 || term < best.value) best = {term, a};
    }
    return best;
}

/// Same linear form evaluated at a fixed action instead of the minimizer.
inline double bellman_at(const CtmdpModel& model, double theta, std::span<const double> values,
                         int i, int action, double cost_scale = 1.0) {
    double term = theta * cost_scale * model.cost[i][action] * values[i];
    const auto& row = model.rates[i][action];
    for (int j = 0; j < model.n; ++j) term += row[j] * values[j];
    return term;
}

}  // namespace rsctmc
