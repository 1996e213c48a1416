#include "rsctmc/risk_neutral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsctmc/errors.hpp"

namespace rsctmc {

std::vector<double> solve_dense(Matrix A, std::vector<double> b) {
    const auto n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[pivot][col])) pivot = r;
        if (std::fabs(A[pivot][col]) < 1e-14)
            throw NumericalError("singular matrix in dense solve (column " +
                                 std::to_string(col) + ")");
        std::swap(A[col], A[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= A[r][c] * x[c];
        x[r] = acc / A[r][r];
    }
    return x;
}

std::vector<double> stationary_distribution(const CtmdpModel& model,
                                            const StationaryPolicy& policy) {
    check_policy(model, policy);
    if (!irreducible_under(model, policy))
        throw ValidationError("stationary distribution requested for a reducible policy");
    const auto n = static_cast<std::size_t>(model.n);
    // pi Lambda = 0 with the last equation replaced by sum pi = 1.
    Matrix A(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n, 0.0);
    for (std::size_t col = 0; col < n; ++col)
        for (std::size_t row = 0; row < n; ++row)
            A[col][row] = model.rates[row][policy[row]][col]; // Lambda^T
    for (std::size_t col = 0; col < n; ++col) A[n - 1][col] = 1.0;
    b[n - 1] = 1.0;
    auto pi = solve_dense(std::move(A), std::move(b));
    for (double& p : pi) p = std::max(p, 0.0);
    double total = 0.0;
    for (double p : pi) total += p;
    for (double& p : pi) p /= total;
    return pi;
}

double risk_neutral_average_cost(const CtmdpModel& model, const StationaryPolicy& policy) {
    auto pi = stationary_distribution(model, policy);
    double avg = 0.0;
    for (int i = 0; i < model.n; ++i) avg += pi[i] * model.cost[i][policy[i]];
    return avg;
}

std::vector<double> risk_neutral_discounted_fixed(const CtmdpModel& model,
                                                  const StationaryPolicy& policy, double alpha) {
    check_policy(model, policy);
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    const auto n = static_cast<std::size_t>(model.n);
    Matrix A(n, std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) A[i][j] = -model.rates[i][policy[i]][j];
        A[i][i] += alpha;
        b[i] = model.cost[i][policy[i]];
    }
    return solve_dense(std::move(A), std::move(b));
}

std::vector<double> risk_neutral_discounted_optimal(const CtmdpModel& model, double alpha) {
    const long long count = policy_count(model);
    if (count > 1000000)
        throw ValidationError("policy enumeration guard exceeded (more than 10^6 policies)");
    std::vector<double> best(static_cast<std::size_t>(model.n),
                             std::numeric_limits<double>::infinity());
    StationaryPolicy policy(static_cast<std::size_t>(model.n), 0);
    for (long long idx = 0; idx < count; ++idx) {
        auto v = risk_neutral_discounted_fixed(model, policy, alpha);
        for (int i = 0; i < model.n; ++i) best[i] = std::min(best[i], v[i]);
        // mixed-radix increment, lexicographic order
        for (int i = model.n - 1; i >= 0; --i) {
            if (++policy[i] < model.num_actions(i)) break;
            policy[i] = 0;
        }
    }
    return best;
}

}  // namespace rsctmc
