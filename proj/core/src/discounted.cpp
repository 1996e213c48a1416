#include "rsctmc/discounted.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsctmc/bellman.hpp"
#include "rsctmc/errors.hpp"
#include "rsctmc/risk_neutral.hpp"

namespace rsctmc {

namespace {

double sup_cost(const CtmdpModel& model) {
    double s = 0.0;
    for (int i = 0; i < model.n; ++i)
        for (double c : model.cost[i]) s = std::max(s, c);
    return s;
}

double sup_exit_rate(const CtmdpModel& model) {
    double m = 0.0;
    for (int i = 0; i < model.n; ++i)
        for (int a = 0; a < model.num_actions(i); ++a) m = std::max(m, model.exit_rate(i, a));
    return m;
}

}  // namespace

double interp_W(const DiscountedSolution& sol, double theta, int state) {
    const auto& grid = sol.theta_grid;
    if (theta <= grid.front()) return sol.W.front()[state];
    if (theta >= grid.back()) return sol.W.back()[state];
    auto it = std::upper_bound(grid.begin(), grid.end(), theta);
    auto hi = static_cast<std::size_t>(it - grid.begin());
    auto lo = hi - 1;
    const double w = (theta - grid[lo]) / (grid[hi] - grid[lo]);
    return (1.0 - w) * sol.W[lo][state] + w * sol.W[hi][state];
}

DiscountedSolution solve_eps(const CtmdpModel& model, double alpha, double eps, double theta_max,
                             int steps) {
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    if (!(eps > 0.0 && eps < theta_max && theta_max < 1.0))
        throw ValidationError("need 0 < eps < theta_max < 1");
    if (steps < 1) throw ValidationError("steps must be >= 1");

    const int n = model.n;
    const int L = steps;
    const double h = (theta_max - eps) / L;
    const double cost_bound = sup_cost(model);
    const double slab_lipschitz = (cost_bound + 2.0 * sup_exit_rate(model) / eps) / alpha;
    if (!(h * slab_lipschitz < 1.0))
        throw NumericalError("theta-step guard violated: h*(||c|| + 2M/eps)/alpha = " +
                             std::to_string(h * slab_lipschitz) + " >= 1; increase steps");

    DiscountedSolution sol;
    sol.alpha = alpha;
    sol.eps = eps;
    sol.theta_grid.resize(static_cast<std::size_t>(L) + 1);
    for (int k = 0; k <= L; ++k) sol.theta_grid[k] = eps + h * k;
    sol.W.assign(static_cast<std::size_t>(L) + 1, std::vector<double>(n));
    sol.policy.assign(static_cast<std::size_t>(L) + 1, std::vector<int>(n));

    // Boundary row, state independent, written exactly.
    const double boundary = std::exp(eps / alpha * cost_bound);
    for (int i = 0; i < n; ++i) sol.W[0][i] = boundary;

    std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n);
    auto rhs = [&](double theta, const std::vector<double>& w, std::vector<double>& out) {
        const double inv = 1.0 / (alpha * theta);
        for (int i = 0; i < n; ++i) out[i] = inv * bellman_min(model, theta, w, i).value;
    };

    for (int k = 0; k < L; ++k) {
        const double theta = sol.theta_grid[k];
        const auto& w = sol.W[k];
        rhs(theta, w, k1);
        for (int i = 0; i < n; ++i) stage[i] = w[i] + 0.5 * h * k1[i];
        rhs(theta + 0.5 * h, stage, k2);
        for (int i = 0; i < n; ++i) stage[i] = w[i] + 0.5 * h * k2[i];
        rhs(theta + 0.5 * h, stage, k3);
        for (int i = 0; i < n; ++i) stage[i] = w[i] + h * k3[i];
        rhs(theta + h, stage, k4);
        auto& next = sol.W[k + 1];
        for (int i = 0; i < n; ++i) {
            next[i] = w[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(next[i]))
                throw NumericalError("non-finite W at theta=" +
                                     std::to_string(sol.theta_grid[k + 1]) + ", state " +
                                     std::to_string(i));
        }
    }

    for (int k = 0; k <= L; ++k)
        for (int i = 0; i < n; ++i)
            sol.policy[k][i] = bellman_min(model, sol.theta_grid[k], sol.W[k], i).action;

    sol.Valpha.assign(sol.W.size(), std::vector<double>(n));
    for (std::size_t k = 0; k < sol.W.size(); ++k)
        for (int i = 0; i < n; ++i)
            sol.Valpha[k][i] = std::log(std::max(sol.W[k][i], 1.0)) / sol.theta_grid[k];
    return sol;
}

DiscountedSolution solve_limit(const CtmdpModel& model, double alpha, double theta_max, int steps,
                               const std::vector<double>& eps_sequence) {
    if (eps_sequence.empty()) throw ValidationError("eps_sequence must be nonempty");
    for (std::size_t k = 1; k < eps_sequence.size(); ++k)
        if (!(eps_sequence[k] < eps_sequence[k - 1]))
            throw ValidationError("eps_sequence must be strictly decreasing");

    std::vector<DiscountedSolution> solutions;
    solutions.reserve(eps_sequence.size());
    for (double eps : eps_sequence)
        solutions.push_back(solve_eps(model, alpha, eps, theta_max, steps));

    const double lo = eps_sequence.front();
    std::vector<double> gaps;
    constexpr int kProbes = 801;
    for (std::size_t k = 0; k + 1 < solutions.size(); ++k) {
        double gap = 0.0;
        for (int p = 0; p < kProbes; ++p) {
            const double theta = lo + (theta_max - lo) * p / (kProbes - 1);
            for (int i = 0; i < model.n; ++i)
                gap = std::max(gap, std::fabs(interp_W(solutions[k], theta, i) -
                                              interp_W(solutions[k + 1], theta, i)));
        }
        gaps.push_back(gap);
    }
    // Gaps at or below 1e-8 are grid-resolution noise (exact in the c == 0
    // case); the decrease requirement only bites above that floor.
    for (std::size_t k = 1; k < gaps.size(); ++k) {
        if (gaps[k - 1] <= 1e-8 && gaps[k] <= 1e-8) continue;
        if (!(gaps[k] < gaps[k - 1]))
            throw NumericalError("eps Cauchy gaps are not decreasing (" +
                                 std::to_string(gaps[k - 1]) + " then " + std::to_string(gaps[k]) +
                                 "); refine the theta grid");
    }

    // Finest-eps solution restricted to theta >= coarsest eps.
    DiscountedSolution fine = std::move(solutions.back());
    std::size_t first = 0;
    while (first < fine.theta_grid.size() && fine.theta_grid[first] < lo - 1e-15) ++first;
    DiscountedSolution out;
    out.alpha = fine.alpha;
    out.eps = fine.eps;
    out.theta_grid.assign(fine.theta_grid.begin() + first, fine.theta_grid.end());
    out.W.assign(fine.W.begin() + first, fine.W.end());
    out.policy.assign(fine.policy.begin() + first, fine.policy.end());
    out.Valpha.assign(fine.Valpha.begin() + first, fine.Valpha.end());
    out.cauchy_gaps = std::move(gaps);
    return out;
}

DiscountedValueReport discounted_value(const CtmdpModel& model, const DiscountedSolution& sol) {
    DiscountedValueReport report;
    report.v_alpha.assign(sol.W.size(), std::vector<double>(model.n));
    for (std::size_t k = 0; k < sol.W.size(); ++k) {
        for (int i = 0; i < model.n; ++i) {
            const double w = sol.W[k][i];
            if (w < 1.0 - 1e-9)
                throw NumericalError("discounted_value: W < 1-1e-9 at theta=" +
                                     std::to_string(sol.theta_grid[k]) + ", state " +
                                     std::to_string(i));
            report.v_alpha[k][i] = std::log(std::max(w, 1.0)) / sol.theta_grid[k];
        }
    }
    report.theta_row = sol.theta_grid.front();
    report.v_at_row = report.v_alpha.front();
    report.risk_neutral = risk_neutral_discounted_optimal(model, sol.alpha);
    for (int i = 0; i < model.n; ++i)
        report.max_abs_gap =
            std::max(report.max_abs_gap, std::fabs(report.v_at_row[i] - report.risk_neutral[i]));
    return report;
}

PolicyLookup discounted_policy_at_time(const DiscountedSolution& sol, double theta, double t) {
    PolicyLookup lookup;
    lookup.theta_query = theta * std::exp(-sol.alpha * t);
    lookup.spacing = sol.theta_grid.size() > 1 ? sol.theta_grid[1] - sol.theta_grid[0] : 0.0;
    if (lookup.theta_query < sol.eps - 1e-15)
        throw ValidationError(
            "theta e^{-alpha t} = " + std::to_string(lookup.theta_query) + " lies below eps = " +
            std::to_string(sol.eps) + "; extend the eps sequence to cover later times");
    auto it = std::lower_bound(sol.theta_grid.begin(), sol.theta_grid.end(), lookup.theta_query);
    std::size_t idx = static_cast<std::size_t>(it - sol.theta_grid.begin());
    if (idx == sol.theta_grid.size()) idx -= 1;
    if (idx > 0 && lookup.theta_query - sol.theta_grid[idx - 1] <
                       sol.theta_grid[idx] - lookup.theta_query)
        idx -= 1;
    lookup.theta_used = sol.theta_grid[idx];
    lookup.action = sol.policy[idx];
    return lookup;
}

}  // namespace rsctmc
