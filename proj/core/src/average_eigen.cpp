#include "rsctmc/average_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsctmc/errors.hpp"

namespace rsctmc {

namespace {

bool support_irreducible(const Matrix& A) {
    const auto n = A.size();
    if (n == 1) return true;
    auto bfs = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < n; ++w) {
                if (seen[w] || w == v) continue;
                if ((forward ? A[v][w] : A[w][v]) > 0.0) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return seen;
    };
    auto fwd = bfs(true);
    auto bwd = bfs(false);
    for (std::size_t v = 0; v < n; ++v)
        if (!fwd[v] || !bwd[v]) return false;
    return true;
}

}  // namespace

Matrix twisted_generator(const CtmdpModel& model, const StationaryPolicy& policy, double theta) {
    check_policy(model, policy);
    const auto n = static_cast<std::size_t>(model.n);
    Matrix A(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        A[i] = model.rates[i][policy[i]];
        A[i][i] += theta * model.cost[i][policy[i]];
    }
    return A;
}

PolicyEvaluation principal_eigen(const Matrix& A, double theta) {
    if (!(theta > 0.0)) throw ValidationError("theta must be positive");
    const auto n = A.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && A[i][j] < 0.0)
                throw ValidationError("matrix is not Metzler (negative off-diagonal)");
    if (!support_irreducible(A))
        throw ValidationError("matrix support is reducible; Perron iteration needs an "
                              "irreducible chain");

    double sigma = 0.0;
    for (std::size_t i = 0; i < n; ++i) sigma = std::max(sigma, -A[i][i]);
    sigma += 1.0;

    std::vector<double> v(n, 1.0 / static_cast<double>(n)), bv(n);
    const int max_iters = 100000;
    double mu_b = 0.0;
    int iter = 0;

    auto sweep = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = sigma * v[i];
            for (std::size_t j = 0; j < n; ++j) acc += A[i][j] * v[j];
            bv[i] = acc;
        }
        double norm = 0.0;
        for (double x : bv) norm += std::fabs(x);
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw NumericalError("power iteration collapsed (norm " + std::to_string(norm) + ")");
        mu_b = norm; // 1^T B v with v >= 0, ||v||_1 = 1
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            bv[i] /= norm;
            change += std::fabs(bv[i] - v[i]);
        }
        v.swap(bv);
        ++iter;
        return change;
    };

    auto make_eval = [&]() {
        if (!(v[0] > 1e-300))
            throw NumericalError("eigenvector underflow at the reference state");
        PolicyEvaluation eval;
        eval.iterations = iter;
        eval.rho = (mu_b - sigma) / theta;
        eval.h.resize(n);
        for (std::size_t i = 0; i < n; ++i) eval.h[i] = v[i] / v[0];
        eval.h[0] = 1.0;
        const double mu = mu_b - sigma;
        eval.residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = -mu * eval.h[i];
            for (std::size_t j = 0; j < n; ++j) acc += A[i][j] * eval.h[j];
            eval.residual = std::max(eval.residual, std::fabs(acc));
        }
        return eval;
    };

    double change = std::numeric_limits<double>::infinity();
    while (iter < max_iters) {
        change = sweep();
        if (change < 1e-12 && iter > 1) break;
    }
    if (change >= 1e-12)
        throw NumericalError("power iteration did not converge in " + std::to_string(max_iters) +
                             " iterations; last eigenvector change " + std::to_string(change) +
                             " suggests a near-degenerate spectral gap");

    // The eigenvector tolerance usually leaves the residual far below 1e-8,
    // but a thin spectral gap can lag; polish until the Poisson residual is
    // safely inside the contract.
    PolicyEvaluation eval = make_eval();
    while (eval.residual > 1e-9 && iter < max_iters) {
        for (int s = 0; s < 50 && iter < max_iters; ++s) sweep();
        eval = make_eval();
    }
    if (eval.residual > 1e-8)
        throw NumericalError("power iteration stalled with residual " +
                             std::to_string(eval.residual) + " after " + std::to_string(iter) +
                             " iterations");
    return eval;
}

PolicyEvaluation evaluate_policy(const CtmdpModel& model, const StationaryPolicy& policy,
                                 double theta) {
    if (!irreducible_under(model, policy))
        throw ValidationError("policy induces a reducible chain; cannot evaluate its "
                              "average cost");
    return principal_eigen(twisted_generator(model, policy, theta), theta);
}

double poisson_residual(const CtmdpModel& model, const StationaryPolicy& policy, double theta,
                        const PolicyEvaluation& eval) {
    check_policy(model, policy);
    double worst = 0.0;
    for (int i = 0; i < model.n; ++i) {
        double acc = theta * model.cost[i][policy[i]] * eval.h[i] - theta * eval.rho * eval.h[i];
        for (int j = 0; j < model.n; ++j) acc += model.rates[i][policy[i]][j] * eval.h[j];
        worst = std::max(worst, std::fabs(acc));
    }
    return worst;
}

LyapunovReport check_lyapunov(const CtmdpModel& model, const LyapunovCertificate& cert) {
    const auto n = static_cast<std::size_t>(model.n);
    if (cert.V.size() != n || cert.drift_weight.size() != n)
        throw ValidationError("certificate vectors must have one entry per state");
    if (!(cert.delta > 0.0)) throw ValidationError("certificate delta must be positive");
    if (!std::isfinite(cert.b)) throw ValidationError("certificate b must be finite");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(cert.V[i] >= 0.0)) throw ValidationError("Lyapunov V must be nonnegative");
        if (!(cert.drift_weight[i] >= 1.0))
            throw ValidationError("drift weight must be >= 1 at every state");
    }

    LyapunovReport report;
    report.margins.resize(n);
    report.holds = true;
    for (std::size_t i = 0; i < n; ++i) {
        report.margins[i].resize(model.actions[i].size());
        for (int a = 0; a < model.num_actions(i); ++a) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double exponent = cert.V[j] - cert.V[i];
                if (exponent > 700.0)
                    throw NumericalError("e^{V(j)-V(i)} overflows for states " +
                                         std::to_string(j) + "," + std::to_string(i) +
                                         "; keep |V(j)-V(i)| <= 700");
                lhs += model.rates[i][a][j] * std::exp(exponent);
            }
            const double rhs = -cert.delta * cert.drift_weight[i] + (i == 0 ? cert.b : 0.0);
            report.margins[i][a] = rhs - lhs;
            if (report.margins[i][a] < 0.0) report.holds = false;
        }
    }
    double cost_sup = 0.0;
    for (int i = 0; i < model.n; ++i)
        for (double c : model.cost[i]) cost_sup = std::max(cost_sup, c);
    report.max_theta = cost_sup > 0.0 ? cert.delta / cost_sup
                                      : std::numeric_limits<double>::infinity();
    return report;
}

}  // namespace rsctmc
