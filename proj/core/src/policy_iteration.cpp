#include "rsctmc/policy_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsctmc/bellman.hpp"
#include "rsctmc/errors.hpp"

namespace rsctmc {

StationaryPolicy improve(const CtmdpModel& model, double theta, const std::vector<double>& h) {
    if (h.size() != static_cast<std::size_t>(model.n))
        throw ValidationError("h must have one entry per state");
    for (double x : h)
        if (!(x > 0.0)) throw ValidationError("h must be strictly positive");
    StationaryPolicy next(static_cast<std::size_t>(model.n));
    for (int i = 0; i < model.n; ++i) next[i] = bellman_min(model, theta, h, i).action;
    return next;
}

AverageSolution policy_iteration(const CtmdpModel& model, double theta,
                                 StationaryPolicy initial) {
    check_policy(model, initial);
    const long long max_policies = policy_count(model);

    AverageSolution sol;
    StationaryPolicy current = std::move(initial);
    double prev_rho = 0.0;

    for (long long round = 0;; ++round) {
        if (round > max_policies)
            throw NumericalError("policy iteration exceeded the policy count (" +
                                 std::to_string(max_policies) +
                                 "); the monotone decrease argument is violated");

        PolicyEvaluation eval = evaluate_policy(model, current, theta);
        sol.trace.emplace_back(current, eval.rho);

        if (round > 0) {
            if (eval.rho > prev_rho + 1e-10)
                throw NumericalError("rho increased between iterations (" +
                                     std::to_string(prev_rho) + " -> " +
                                     std::to_string(eval.rho) + "); eigen solver failure");
        }
        prev_rho = eval.rho;

        StationaryPolicy next = improve(model, theta, eval.h);

        // Secondary optimality certificate: the minimized value equals the
        // current policy's value statewise (within 1e-10 relative).
        bool equality = true;
        for (int i = 0; i < model.n && equality; ++i) {
            const double minimized = bellman_min(model, theta, eval.h, i).value;
            const double at_current = bellman_at(model, theta, eval.h, i, current[i]);
            const double scale = std::max({1.0, std::fabs(minimized), std::fabs(at_current)});
            if (std::fabs(minimized - at_current) > 1e-10 * scale) equality = false;
        }

        if (next == current || equality) {
            sol.rho_star = eval.rho;
            sol.policy = current;
            sol.h = eval.h;
            sol.eigen_residual = eval.residual;
            sol.eigen_iterations = eval.iterations;
            sol.acdpe_residual = acdpe_residual(model, theta, eval.rho, eval.h);
            // Strict decrease at every non-final step.
            for (std::size_t k = 0; k + 1 < sol.trace.size(); ++k)
                if (!(sol.trace[k + 1].second < sol.trace[k].second - 1e-12))
                    throw NumericalError(
                        "trace is not strictly decreasing at iteration " + std::to_string(k) +
                        " (" + std::to_string(sol.trace[k].second) + " -> " +
                        std::to_string(sol.trace[k + 1].second) + ")");
            return sol;
        }
        current = std::move(next);
    }
}

BruteForceResult brute_force_average(const CtmdpModel& model, double theta) {
    const long long count = policy_count(model);
    if (count > 1000000)
        throw ValidationError("brute force guard exceeded (more than 10^6 policies)");

    BruteForceResult result;
    StationaryPolicy policy(static_cast<std::size_t>(model.n), 0);
    bool have_best = false;
    for (long long idx = 0; idx < count; ++idx) {
        if (irreducible_under(model, policy)) {
            PolicyEvaluation eval = principal_eigen(twisted_generator(model, policy, theta),
                                                    theta);
            result.table.push_back({policy, eval.rho});
            // Enumeration is lexicographic, so strict < keeps the smallest
            // policy among exact rho ties.
            if (!have_best || eval.rho < result.rho_star) {
                result.rho_star = eval.rho;
                result.policy = policy;
                have_best = true;
            }
        } else {
            result.reducible_skipped.push_back(policy);
        }
        for (int i = model.n - 1; i >= 0; --i) {
            if (++policy[i] < model.num_actions(i)) break;
            policy[i] = 0;
        }
    }
    if (!have_best)
        throw ValidationError("every stationary policy is reducible; no average cost exists");
    return result;
}

double acdpe_residual(const CtmdpModel& model, double theta, double rho,
                      const std::vector<double>& h) {
    double worst = 0.0;
    for (int i = 0; i < model.n; ++i) {
        const double minimized = bellman_min(model, theta, h, i).value;
        worst = std::max(worst, std::fabs(theta * rho * h[i] - minimized));
    }
    return worst;
}

}  // namespace rsctmc
