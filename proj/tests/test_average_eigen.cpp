#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsctmc/average_eigen.hpp"
#include "rsctmc/errors.hpp"
#include "rsctmc/risk_neutral.hpp"
#include "rsctmc/simulate.hpp"
#include "oracle_eigen.hpp"
#include "test_support.hpp"

using namespace rsctmc;
namespace tt = rsctmc::testing;

TEST_CASE("twisted generator assembly") {
    auto sym = tt::two_state_symmetric(1.0, 2.0);
    auto A = twisted_generator(sym, {0, 0}, 0.5);
    CHECK(A[0][0] == doctest::Approx(-1.0 + 0.5 * 2.0));
    CHECK(A[0][1] == 1.0);
    CHECK(A[1][0] == 1.0);
    CHECK(A[1][1] == doctest::Approx(-1.0 + 0.5 * 2.0));

    // zero cost: the twisted generator is the generator itself
    auto zero = tt::two_state_symmetric(1.0, 0.0);
    auto Z = twisted_generator(zero, {0, 0}, 0.5);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(Z[i][j] == zero.rates[i][0][j]);

    // desk model under (b, a), hand assembled
    auto m2 = tt::desk_m2();
    auto B = twisted_generator(m2, {1, 0}, 0.5);
    CHECK(B[0][0] == doctest::Approx(-2.0 + 0.5 * 1.0));
    CHECK(B[0][1] == 2.0);
    CHECK(B[1][0] == 1.0);
    CHECK(B[1][1] == doctest::Approx(-1.0));
}

TEST_CASE("constant cost forces rho = c0 and flat h") {
    for (double theta : {0.2, 0.5, 0.8}) {
        auto eval = evaluate_policy(tt::two_state_symmetric(1.0, 1.5), {0, 0}, theta);
        CHECK(eval.rho == doctest::Approx(1.5).epsilon(1e-10));
        CHECK(eval.h[0] == 1.0);
        CHECK(eval.h[1] == doctest::Approx(1.0).epsilon(1e-10));
    }
    auto zero = evaluate_policy(tt::two_state_symmetric(1.0, 0.0), {0, 0}, 0.5);
    CHECK(std::fabs(zero.rho) <= 1e-10);
    CHECK(zero.h[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("desk model (a,a) matches the golden-ratio closed form") {
    // A = [[0,1],[1,-1]]: mu solves mu^2 + mu - 1 = 0, h = (1, mu)
    const double mu = (std::sqrt(5.0) - 1.0) / 2.0;
    auto eval = evaluate_policy(tt::desk_m2(), {0, 0}, 0.5);
    CHECK(eval.rho == doctest::Approx(mu / 0.5).epsilon(1e-11));
    CHECK(eval.h[1] == doctest::Approx(mu).epsilon(1e-11));
    CHECK(eval.residual <= 1e-8);
}

TEST_CASE("dense oracle agreement on random instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto model = tt::random_instance(seed);
        auto policies = tt::all_policies(model);
        const auto& policy = policies[seed % policies.size()];
        auto A = twisted_generator(model, policy, 0.5);
        auto mine = principal_eigen(A, 0.5);
        auto oracle = tt::dense_perron(A);
        CHECK(std::fabs(mine.rho * 0.5 - oracle.eigenvalue) <= 1e-9);
        for (int i = 0; i < model.n; ++i)
            CHECK(mine.h[i] == doctest::Approx(oracle.eigenvector[i]).epsilon(1e-7));
    }
}

TEST_CASE("simulated growth rate agrees with the eigenvalue") {
    // finite-T simulation carries a small systematic deficit at this sample
    // size; 5% relative is the contract
    auto model = tt::desk_m2();
    auto eval = evaluate_policy(model, {0, 0}, 0.5);
    auto est = mc_average_growth(model, {0, 0}, 0.5, 100.0, 0, 10000, 7);
    CHECK(std::fabs(est.mean - eval.rho) <= 0.05 * eval.rho);
}

TEST_CASE("poisson residual") {
    auto sym = tt::two_state_symmetric(1.0, 1.5);
    PolicyEvaluation flat{1.5, {1.0, 1.0}, 0.0, 0};
    CHECK(poisson_residual(sym, {0, 0}, 0.5, flat) <= 1e-15);

    auto eval = evaluate_policy(tt::desk_m2(), {0, 0}, 0.5);
    CHECK(poisson_residual(tt::desk_m2(), {0, 0}, 0.5, eval) <= 1e-8);
}

TEST_CASE("growth rate sandwich and h positivity") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto model = tt::random_instance(seed);
        for (const auto& policy : tt::all_policies(model)) {
            auto eval = evaluate_policy(model, policy, 0.5);
            double cmin = 1e300, cmax = 0.0;
            for (int i = 0; i < model.n; ++i) {
                cmin = std::min(cmin, model.cost[i][policy[i]]);
                cmax = std::max(cmax, model.cost[i][policy[i]]);
            }
            CHECK(eval.rho >= cmin - 1e-9);
            CHECK(eval.rho <= cmax + 1e-9);
            CHECK(eval.h[0] == 1.0);
            for (double x : eval.h) CHECK(x > 0.0);
            CHECK(eval.residual <= 1e-8);
        }
    }
}

TEST_CASE("constant cost shift moves rho and leaves h") {
    auto model = tt::desk_m2();
    const double beta = 0.8, theta = 0.5;
    auto base = evaluate_policy(model, {0, 0}, theta);

    auto shifted_model = model;
    for (auto& row : shifted_model.cost)
        for (double& c : row) c += beta;
    auto shifted = evaluate_policy(shifted_model, {0, 0}, theta);

    CHECK(shifted.rho == doctest::Approx(base.rho + beta).epsilon(1e-10));
    for (int i = 0; i < model.n; ++i)
        CHECK(shifted.h[i] == doctest::Approx(base.h[i]).epsilon(1e-10));
}

TEST_CASE("rho is nondecreasing in theta and tends to the stationary cost") {
    auto model = tt::desk_m2();
    StationaryPolicy policy{0, 0};
    double prev = -1e300;
    for (double theta : {0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
        auto eval = evaluate_policy(model, policy, theta);
        CHECK(eval.rho >= prev - 1e-8);
        prev = eval.rho;
    }
    const double risk_neutral = risk_neutral_average_cost(model, policy);
    for (double theta : {1e-3, 1e-2}) {
        auto eval = evaluate_policy(model, policy, theta);
        CHECK(std::fabs(eval.rho - risk_neutral) <= 1e-2);
    }
}

TEST_CASE("reducible policies are rejected by name") {
    CtmdpModel trap;
    trap.n = 2;
    trap.actions = {{"go", "stay"}, {"a"}};
    trap.rates = {{{-1.0, 1.0}, {0.0, 0.0}}, {{1.0, -1.0}}};
    trap.cost = {{1.0, 1.0}, {0.0}};
    trap.terminal = {0.0, 0.0};
    CHECK_NOTHROW(evaluate_policy(trap, {0, 0}, 0.5));
    CHECK_THROWS_WITH_AS(evaluate_policy(trap, {1, 0}, 0.5),
                         doctest::Contains("reducible"), ValidationError);
}

TEST_CASE("principal_eigen input validation") {
    CHECK_THROWS_AS(principal_eigen({{-1.0, -0.5}, {1.0, -1.0}}, 0.5), ValidationError);
    CHECK_THROWS_AS(principal_eigen({{0.0, 1.0}, {1.0, -1.0}}, 0.0), ValidationError);
    // reducible support
    CHECK_THROWS_AS(principal_eigen({{-1.0, 1.0}, {0.0, 0.0}}, 0.5), ValidationError);
}

TEST_CASE("lyapunov margins: V == 0 fails away from the reference state") {
    auto model = tt::two_state_symmetric(1.0, 1.0);
    LyapunovCertificate cert{{0.0, 0.0}, {1.0, 1.0}, 0.3, 5.0};
    auto report = check_lyapunov(model, cert);
    CHECK_FALSE(report.holds);
    CHECK(report.margins[0][0] >= 0.0);      // b absorbs state 0
    CHECK(report.margins[1][0] < 0.0);       // -delta W(1) < 0 with zero LHS
    CHECK(report.max_theta == doctest::Approx(0.3));
}

TEST_CASE("two-state certificate closed by hand") {
    // V = (0, v1): state-1 inequality reads e^{-v1} - 1 <= -delta, so
    // delta = 1 - e^{-v1} closes it with equality; state 0 needs
    // b >= e^{v1} - 1 + delta.
    auto model = tt::two_state_symmetric(1.0, 1.0);
    const double v1 = 1.0;
    const double delta = 1.0 - std::exp(-v1);
    const double b = std::exp(v1) - 1.0 + delta;
    LyapunovCertificate cert{{0.0, v1}, {1.0, 1.0}, delta, b};
    auto report = check_lyapunov(model, cert);
    CHECK(report.holds);
    CHECK(report.margins[1][0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(report.margins[0][0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("lyapunov input contracts") {
    auto model = tt::two_state_symmetric(1.0, 1.0);
    CHECK_THROWS_AS(check_lyapunov(model, {{0.0}, {1.0, 1.0}, 0.1, 1.0}), ValidationError);
    CHECK_THROWS_AS(check_lyapunov(model, {{0.0, 0.0}, {1.0, 0.5}, 0.1, 1.0}), ValidationError);
    CHECK_THROWS_AS(check_lyapunov(model, {{0.0, 0.0}, {1.0, 1.0}, 0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(check_lyapunov(model, {{0.0, 800.0}, {1.0, 1.0}, 0.1, 1.0}), NumericalError);
}
