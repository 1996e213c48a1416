#include "rsctmc/finite_horizon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsctmc/bellman.hpp"
#include "rsctmc/errors.hpp"

namespace rsctmc {

namespace {

void check_common(double theta, double horizon, int steps) {
    if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("theta must lie in (0,1)");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    if (steps < 1) throw ValidationError("steps must be >= 1");
}

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

std::vector<double> terminal_phi(const CtmdpModel& model, double theta) {
    std::vector<double> row(model.n);
    for (int i = 0; i < model.n; ++i) row[i] = std::exp(theta * model.terminal[i]);
    return row;
}

// Undershoot handling shared by both solvers: tiny dips below 1 are rounding,
// anything below 1 - 1e-9 means the solve has gone wrong.
void clamp_row(std::vector<double>& row, double t) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!std::isfinite(row[i]))
            throw NumericalError("non-finite value at t=" + std::to_string(t) + ", state " +
                                 std::to_string(i));
        if (row[i] < 1.0) {
            if (row[i] < 1.0 - 1e-9)
                throw NumericalError("phi undershoot below 1-1e-9 at t=" + std::to_string(t) +
                                     ", state " + std::to_string(i));
            row[i] = 1.0;
        }
    }
}

}  // namespace

int MarkovPolicy::at(double t, int state) const {
    if (times.empty()) return -1;
    const double t0 = times.front();
    const double h = times.size() > 1 ? times[1] - times[0] : 1.0;
    auto k = static_cast<long>(std::floor((t - t0) / h));
    k = std::clamp<long>(k, 0, static_cast<long>(times.size()) - 1);
    return action[static_cast<std::size_t>(k)][state];
}

FiniteSolution solve_finite_horizon(const CtmdpModel& model, double theta, double horizon,
                                    int steps, const std::vector<double>* cost_multiplier) {
    check_common(theta, horizon, steps);
    const int n = model.n;
    const int K = steps;
    const double h = horizon / K;

    std::vector<double> mult(static_cast<std::size_t>(K) + 1, 1.0);
    if (cost_multiplier) {
        if (cost_multiplier->size() != mult.size())
            throw ValidationError("cost_multiplier must have steps+1 entries");
        for (double m : *cost_multiplier)
            if (!(m >= 0.0) || !std::isfinite(m))
                throw ValidationError("cost_multiplier entries must be finite and >= 0");
        mult = *cost_multiplier;
    }
    const double mult_max = *std::max_element(mult.begin(), mult.end());
    const double lipschitz = 2.0 * sup_exit_rate(model) + theta * sup_cost(model) * mult_max;
    if (!(h * lipschitz < 1.0))
        throw NumericalError("stability guard violated: h*(2M + theta*||c||) = " +
                             std::to_string(h * lipschitz) + " >= 1; increase steps");

    ValueGrid grid;
    grid.theta = theta;
    grid.horizon = horizon;
    grid.times.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) grid.times[k] = h * k;
    grid.phi.assign(static_cast<std::size_t>(K) + 1, std::vector<double>(n));
    grid.phi[K] = terminal_phi(model, theta);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n);
    auto rhs = [&](const std::vector<double>& p, double scale, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) out[i] = bellman_min(model, theta, p, i, scale).value;
    };

    // March backward; on [t_{k-1}, t_k) the cost multiplier is mult[k-1].
    for (int k = K; k > 0; --k) {
        const double scale = mult[k - 1];
        const auto& y = grid.phi[k];
        rhs(y, scale, k1);
        for (int i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * h * k1[i];
        rhs(stage, scale, k2);
        for (int i = 0; i < n; ++i) stage[i] = y[i] + 0.5 * h * k2[i];
        rhs(stage, scale, k3);
        for (int i = 0; i < n; ++i) stage[i] = y[i] + h * k3[i];
        rhs(stage, scale, k4);
        auto& target = grid.phi[k - 1];
        for (int i = 0; i < n; ++i)
            target[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        clamp_row(target, grid.times[k - 1]);
    }

    grid = log_value(std::move(grid));

    MarkovPolicy policy;
    policy.times = grid.times;
    policy.action.assign(static_cast<std::size_t>(K) + 1, std::vector<int>(n));
    for (int k = 0; k <= K; ++k)
        for (int i = 0; i < n; ++i)
            policy.action[k][i] = bellman_min(model, theta, grid.phi[k], i, mult[k]).action;

    return {std::move(grid), std::move(policy)};
}

ValueGrid picard_solve(const CtmdpModel& model, double theta, double horizon, int steps) {
    check_common(theta, horizon, steps);
    const int n = model.n;
    const int K = steps;
    const double h = horizon / K;
    const double tol = 1e-10;

    const double lip = 2.0 * sup_exit_rate(model) + theta * sup_cost(model);
    const double gamma0 = lip + 1.0;
    const double beta = lip / gamma0;
    const int max_iters =
        static_cast<int>(std::ceil(std::log(tol) / std::log(beta))) + 50;

    ValueGrid grid;
    grid.theta = theta;
    grid.horizon = horizon;
    grid.times.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) grid.times[k] = h * k;

    const auto phi_T = terminal_phi(model, theta);
    grid.phi.assign(static_cast<std::size_t>(K) + 1, phi_T);

    Matrix rhs(static_cast<std::size_t>(K) + 1, std::vector<double>(n));
    Matrix next(static_cast<std::size_t>(K) + 1, std::vector<double>(n));

    for (int iter = 0; iter < max_iters; ++iter) {
        for (int k = 0; k <= K; ++k)
            for (int i = 0; i < n; ++i)
                rhs[k][i] = bellman_min(model, theta, grid.phi[k], i).value;
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            next[K][i] = phi_T[i];
            for (int k = K - 1; k >= 0; --k) {
                acc += 0.5 * h * (rhs[k][i] + rhs[k + 1][i]);
                next[k][i] = phi_T[i] + acc;
            }
        }
        for (int k = 0; k <= K; ++k)
            for (int i = 0; i < n; ++i)
                diff = std::max(diff, std::fabs(next[k][i] - grid.phi[k][i]));
        grid.phi.swap(next);
        if (diff < tol) {
            for (int k = 0; k <= K; ++k) clamp_row(grid.phi[k], grid.times[k]);
            return log_value(std::move(grid));
        }
    }
    throw NumericalError("picard_solve did not converge within " + std::to_string(max_iters) +
                         " sweeps (contraction factor " + std::to_string(beta) + ")");
}

MarkovPolicy extract_policy(const CtmdpModel& model, double theta, const ValueGrid& grid) {
    MarkovPolicy policy;
    policy.times = grid.times;
    policy.action.assign(grid.times.size(), std::vector<int>(model.n));
    for (std::size_t k = 0; k < grid.times.size(); ++k)
        for (int i = 0; i < model.n; ++i)
            policy.action[k][i] = bellman_min(model, theta, grid.phi[k], i).action;
    return policy;
}

double hjb_residual(const CtmdpModel& model, double theta, const ValueGrid& grid) {
    const auto K = grid.times.size() - 1;
    double worst = 0.0;
    for (std::size_t k = 1; k < K; ++k) {
        const double two_h = grid.times[k + 1] - grid.times[k - 1];
        for (int i = 0; i < model.n; ++i) {
            const double dphi = (grid.phi[k + 1][i] - grid.phi[k - 1][i]) / two_h;
            const double r = dphi + bellman_min(model, theta, grid.phi[k], i).value;
            worst = std::max(worst, std::fabs(r));
        }
    }
    return worst;
}

ValueGrid log_value(ValueGrid grid) {
    grid.psi.assign(grid.phi.size(), std::vector<double>(grid.phi.empty() ? 0 : grid.phi[0].size()));
    for (std::size_t k = 0; k < grid.phi.size(); ++k) {
        for (std::size_t i = 0; i < grid.phi[k].size(); ++i) {
            const double p = grid.phi[k][i];
            if (p < 1.0 - 1e-9)
                throw NumericalError("log_value: phi < 1-1e-9 at row " + std::to_string(k) +
                                     ", state " + std::to_string(i));
            grid.psi[k][i] = std::log(std::max(p, 1.0)) / grid.theta;
        }
    }
    return grid;
}

}  // namespace rsctmc
