// rsctmc: risk-sensitive control of finite continuous-time Markov chains.
//
// One binary, subcommand style. Every subcommand reads a JSON model document,
// emits a single self-describing JSON document (stdout, or --output), and is
// deterministic given its flags, seed included. Human-readable summaries for
// crosscheck go to stderr; stdout carries only the document.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure,
// 3 crosscheck failure, 64 usage.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsctmc/average_eigen.hpp"
#include "rsctmc/discounted.hpp"
#include "rsctmc/errors.hpp"
#include "rsctmc/finite_horizon.hpp"
#include "rsctmc/json_io.hpp"
#include "rsctmc/model.hpp"
#include "rsctmc/policy_iteration.hpp"
#include "rsctmc/risk_neutral.hpp"
#include "rsctmc/simulate.hpp"

namespace {

using nlohmann::ordered_json;
using namespace rsctmc;

struct Output {
    std::string path; // empty -> stdout
    void emit(const ordered_json& doc) const {
        if (path.empty()) {
            std::cout << doc.dump(2) << "\n";
        } else {
            std::ofstream out(path);
            if (!out) throw ValidationError("cannot open output file: " + path);
            out << doc.dump(2) << "\n";
        }
    }
};

StationaryPolicy parse_policy(const std::string& text, const CtmdpModel& model) {
    StationaryPolicy policy;
    if (text.empty()) {
        policy.assign(static_cast<std::size_t>(model.n), 0);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                policy.push_back(std::stoi(item));
            } catch (...) {
                throw ValidationError("policy entries must be integer action indices: '" + item +
                                      "'");
            }
        }
    }
    check_policy(model, policy);
    return policy;
}

ordered_json policy_labels(const CtmdpModel& model, const StationaryPolicy& policy) {
    ordered_json labels = ordered_json::array();
    for (int i = 0; i < model.n; ++i) labels.push_back(model.actions[i][policy[i]]);
    return labels;
}

ordered_json estimate_doc(const McEstimate& est) {
    ordered_json doc;
    doc["functional"] = est.functional;
    doc["mean"] = est.mean;
    doc["std_error"] = est.std_error;
    doc["n_samples"] = est.n_samples;
    doc["seed"] = est.seed;
    if (est.bias_bound > 0.0) doc["bias_bound"] = est.bias_bound;
    if (est.ce_std_error > 0.0) {
        doc["certainty_equivalent"] = est.ce;
        doc["certainty_equivalent_std_error"] = est.ce_std_error;
    }
    if (est.has_certificate_bound) {
        doc["certificate_bound"] = est.certificate_bound;
        doc["within_certificate_bound"] =
            est.mean <= est.certificate_bound + 3.0 * est.std_error;
    }
    return doc;
}

LyapunovCertificate load_certificate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open certificate file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        LyapunovCertificate cert;
        cert.V = doc.at("V").get<std::vector<double>>();
        cert.drift_weight = doc.at("drift_weight").get<std::vector<double>>();
        cert.delta = doc.at("delta").get<double>();
        cert.b = doc.at("b").get<double>();
        return cert;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("certificate document is malformed: ") + e.what());
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Risk-sensitive control of finite continuous-time Markov chains"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    std::string model_path;
    std::string output_path;
    std::string policy_text;
    std::string cert_path;
    std::string multiplier_path;
    double theta = 0.5;
    double alpha = 1.0;
    double horizon = 1.0;
    double theta_max = 0.9;
    double eta = 0.1;
    double t0 = 0.0;
    double t_max = -1.0;
    double se_mult = 3.0;
    std::vector<double> eps_list{1e-2, 5e-3, 2.5e-3};
    int steps_k = 2000;
    int steps_l = 10000;
    int start = 0;
    long n_samples = 100000;
    std::uint64_t seed = 0;
    bool stop_at_zero = false;
    std::optional<double> t_end_flag;
    std::string functional = "finite";
    std::string which = "finite";

    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("model", model_path, "model document (JSON)")->required();
        cmd->add_option("-o,--output", output_path, "write the document here instead of stdout");
    };

    auto* validate_cmd = app.add_subcommand("validate", "check a model document and report "
                                                        "diagnostics");
    add_model(validate_cmd);

    auto* finite_cmd = app.add_subcommand("solve-finite", "finite-horizon solver (backward RK4)");
    add_model(finite_cmd);
    finite_cmd->add_option("--theta", theta, "risk parameter in (0,1)");
    finite_cmd->add_option("-T,--horizon", horizon, "time horizon");
    finite_cmd->add_option("-K,--steps", steps_k, "grid steps");
    finite_cmd->add_option("--cost-multiplier", multiplier_path,
                           "JSON array of K+1 piecewise-constant cost multipliers");

    auto* disc_cmd = app.add_subcommand("solve-discounted", "discounted solver (theta-ODE with "
                                                            "eps halving study)");
    add_model(disc_cmd);
    disc_cmd->add_option("--alpha", alpha, "discount rate > 0");
    disc_cmd->add_option("--theta-max", theta_max, "upper end of the theta grid, < 1");
    disc_cmd->add_option("-L,--steps", steps_l, "theta grid steps");
    disc_cmd->add_option("--eps", eps_list, "decreasing eps sequence (single value: one solve)");

    auto* avg_cmd = app.add_subcommand("solve-average", "average-cost policy iteration");
    add_model(avg_cmd);
    avg_cmd->add_option("--theta", theta, "risk parameter in (0,1)");
    avg_cmd->add_option("--init", policy_text, "initial policy, comma-separated action indices");
    avg_cmd->add_option("--cert", cert_path,
                        "drift certificate; warns when theta ||c|| >= delta");

    auto* brute_cmd = app.add_subcommand("brute-force", "evaluate every stationary policy");
    add_model(brute_cmd);
    brute_cmd->add_option("--theta", theta, "risk parameter in (0,1)");

    auto* sim_cmd = app.add_subcommand("simulate", "sample one trajectory");
    add_model(sim_cmd);
    sim_cmd->add_option("--policy", policy_text, "stationary policy, comma-separated indices");
    sim_cmd->add_option("--start", start, "start state");
    sim_cmd->add_option("--t0", t0, "start time");
    auto* te = sim_cmd->add_option("--t-end", t_end_flag, "simulate on [t0, t_end]");
    sim_cmd->add_flag("--stop-at-zero", stop_at_zero, "run until the chain hits state 0")
        ->excludes(te);
    sim_cmd->add_option("--seed", seed, "RNG seed");

    auto* est_cmd = app.add_subcommand("estimate", "Monte Carlo estimate of a cost functional");
    add_model(est_cmd);
    est_cmd->add_option("--functional", functional,
                        "finite | discounted | average-growth | exp-hitting | poisson-h")
        ->check(CLI::IsMember({"finite", "discounted", "average-growth", "exp-hitting",
                               "poisson-h"}));
    est_cmd->add_option("--policy", policy_text, "stationary policy, comma-separated indices");
    est_cmd->add_option("--theta", theta, "risk parameter");
    est_cmd->add_option("--alpha", alpha, "discount rate (discounted functional)");
    est_cmd->add_option("--eta", eta, "exponent for exp-hitting");
    auto* est_horizon =
        est_cmd->add_option("-T,--horizon", horizon,
                            "horizon (finite / average-growth; average-growth defaults to "
                            "100 / min positive rate)");
    est_cmd->add_option("--t-max", t_max, "truncation time (discounted; default from bias bound)");
    est_cmd->add_option("--start", start, "start state");
    est_cmd->add_option("-N,--samples", n_samples, "trajectory count");
    est_cmd->add_option("--seed", seed, "RNG seed");
    est_cmd->add_option("--cert", cert_path, "Lyapunov certificate (exp-hitting comparison)");

    auto* lyap_cmd = app.add_subcommand("check-lyapunov", "evaluate a drift certificate");
    add_model(lyap_cmd);
    lyap_cmd->add_option("--cert", cert_path, "certificate document (JSON)")->required();
    lyap_cmd->add_option("--theta", theta, "report whether theta ||c|| < delta");

    auto* cross_cmd = app.add_subcommand("crosscheck", "solver vs Monte Carlo agreement");
    cross_cmd->add_option("kind", which, "finite | discounted | average")
        ->required()
        ->check(CLI::IsMember({"finite", "discounted", "average"}));
    add_model(cross_cmd);
    cross_cmd->add_option("--theta", theta, "risk parameter");
    cross_cmd->add_option("--alpha", alpha, "discount rate (discounted)");
    cross_cmd->add_option("-T,--horizon", horizon, "horizon (finite / average)");
    cross_cmd->add_option("-K,--steps", steps_k, "finite-horizon grid steps");
    cross_cmd->add_option("-L,--theta-steps", steps_l, "discounted theta grid steps");
    cross_cmd->add_option("-N,--samples", n_samples, "trajectory count");
    cross_cmd->add_option("--seed", seed, "RNG seed");
    cross_cmd->add_option("--se-mult", se_mult, "tolerance in standard errors");
    cross_cmd->add_option("--policy", policy_text, "policy for the average check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    Output out{output_path};
    ordered_json doc;
    doc["tool"] = "rsctmc";

    if (validate_cmd->parsed()) {
        auto model = load_model_file(model_path);
        auto diag = validate(model);
        doc["subcommand"] = "validate";
        doc["config"] = {{"model", model_path}};
        doc["diagnostics"] = {{"M", diag.M},
                              {"cost_sup", diag.cost_sup},
                              {"terminal_sup", diag.terminal_sup},
                              {"row_sum_err", diag.row_sum_err},
                              {"irreducible_all", diag.irreducible_all}};
        out.emit(doc);
        return 0;
    }

    if (finite_cmd->parsed()) {
        auto model = load_model_file(model_path);
        std::vector<double> multiplier;
        const std::vector<double>* mult_ptr = nullptr;
        if (!multiplier_path.empty()) {
            std::ifstream in(multiplier_path);
            if (!in) throw ValidationError("cannot open multiplier file: " + multiplier_path);
            multiplier = nlohmann::json::parse(in).get<std::vector<double>>();
            mult_ptr = &multiplier;
        }
        auto sol = solve_finite_horizon(model, theta, horizon, steps_k, mult_ptr);
        doc["subcommand"] = "solve-finite";
        doc["config"] = {{"model", model_path}, {"theta", theta}, {"T", horizon},
                         {"K", steps_k}};
        if (mult_ptr) doc["config"]["cost_multiplier"] = multiplier;
        doc["times"] = sol.grid.times;
        doc["phi"] = sol.grid.phi;
        doc["psi"] = sol.grid.psi;
        doc["policy"] = sol.policy.action;
        doc["residual"] = hjb_residual(model, theta, sol.grid);
        doc["solver"] = {{"method", "rk4-backward"}, {"picard_tolerance", 1e-10}};
        out.emit(doc);
        return 0;
    }

    if (disc_cmd->parsed()) {
        auto model = load_model_file(model_path);
        DiscountedSolution sol =
            eps_list.size() == 1
                ? solve_eps(model, alpha, eps_list[0], theta_max, steps_l)
                : solve_limit(model, alpha, theta_max, steps_l, eps_list);
        doc["subcommand"] = "solve-discounted";
        doc["config"] = {{"model", model_path}, {"alpha", alpha}, {"theta_max", theta_max},
                         {"L", steps_l}, {"eps", eps_list}};
        doc["eps"] = sol.eps;
        doc["theta_grid"] = sol.theta_grid;
        doc["W"] = sol.W;
        doc["V_alpha"] = sol.Valpha;
        doc["policy"] = sol.policy;
        if (!sol.cauchy_gaps.empty()) doc["cauchy_gaps"] = sol.cauchy_gaps;
        if (policy_count(model) <= 4096) {
            auto report = discounted_value(model, sol);
            doc["risk_neutral_comparison"] = {{"theta_row", report.theta_row},
                                              {"v_alpha", report.v_at_row},
                                              {"risk_neutral", report.risk_neutral},
                                              {"max_abs_gap", report.max_abs_gap}};
        }
        out.emit(doc);
        return 0;
    }

    if (avg_cmd->parsed()) {
        auto model = load_model_file(model_path);
        auto initial = parse_policy(policy_text, model);
        auto sol = policy_iteration(model, theta, initial);
        doc["subcommand"] = "solve-average";
        doc["config"] = {{"model", model_path}, {"theta", theta}, {"init", initial}};
        if (!cert_path.empty()) {
            auto report = check_lyapunov(model, load_certificate(cert_path));
            doc["certificate"] = {{"holds", report.holds}, {"max_theta", report.max_theta}};
            if (theta >= report.max_theta) {
                // finite state space: the solve stands on its own, the
                // certificate hypothesis theta ||c|| < delta just fails
                const std::string warning =
                    "theta ||c|| < delta does not hold (theta = " + std::to_string(theta) +
                    ", delta/||c|| = " + std::to_string(report.max_theta) +
                    "); solving anyway, the certificate bounds do not apply";
                doc["warnings"] = {warning};
                std::cerr << "warning: " << warning << "\n";
            }
        }
        doc["rho_star"] = sol.rho_star;
        doc["policy"] = sol.policy;
        doc["policy_labels"] = policy_labels(model, sol.policy);
        doc["h"] = sol.h;
        doc["eigen_residual"] = sol.eigen_residual;
        doc["acdpe_residual"] = sol.acdpe_residual;
        doc["eigen_iterations"] = sol.eigen_iterations;
        doc["irreducible"] = irreducible_under(model, sol.policy);
        ordered_json trace = ordered_json::array();
        for (const auto& [pol, rho] : sol.trace)
            trace.push_back({{"policy", pol}, {"rho", rho}});
        doc["trace"] = std::move(trace);
        out.emit(doc);
        return 0;
    }

    if (brute_cmd->parsed()) {
        auto model = load_model_file(model_path);
        auto result = brute_force_average(model, theta);
        doc["subcommand"] = "brute-force";
        doc["config"] = {{"model", model_path}, {"theta", theta}};
        doc["rho_star"] = result.rho_star;
        doc["policy"] = result.policy;
        doc["policy_labels"] = policy_labels(model, result.policy);
        ordered_json table = ordered_json::array();
        for (const auto& entry : result.table)
            table.push_back({{"policy", entry.policy}, {"rho", entry.rho}});
        doc["table"] = std::move(table);
        if (!result.reducible_skipped.empty())
            doc["reducible_skipped"] = result.reducible_skipped;
        out.emit(doc);
        return 0;
    }

    if (sim_cmd->parsed()) {
        auto model = load_model_file(model_path);
        auto policy = parse_policy(policy_text, model);
        auto traj = simulate(model, stationary_selector(policy), start, t0, t_end_flag,
                             stop_at_zero, seed);
        doc["subcommand"] = "simulate";
        doc["config"] = {{"model", model_path}, {"policy", policy}, {"start", start},
                         {"t0", t0}, {"stop_at_zero", stop_at_zero}, {"seed", seed}};
        if (t_end_flag) doc["config"]["t_end"] = *t_end_flag;
        doc["times"] = traj.times;
        doc["states"] = traj.states;
        doc["actions"] = traj.actions;
        doc["t_end"] = traj.t_end;
        out.emit(doc);
        return 0;
    }

    if (est_cmd->parsed()) {
        auto model = load_model_file(model_path);
        auto policy = parse_policy(policy_text, model);
        McEstimate est;
        if (functional == "finite") {
            MarkovPolicy constant;
            constant.times = {0.0, horizon};
            constant.action = {policy, policy};
            est = mc_finite_cost(model, constant, theta, horizon, start, n_samples, seed);
        } else if (functional == "discounted") {
            double cost_sup = 0.0;
            for (int i = 0; i < model.n; ++i)
                for (double c : model.cost[i]) cost_sup = std::max(cost_sup, c);
            if (t_max <= 0.0)
                t_max = cost_sup > 0.0
                            ? std::log(theta * cost_sup / (alpha * 0.5e-4)) / alpha
                            : 1.0;
            est = mc_discounted_cost(model, stationary_selector(policy), theta, alpha, start,
                                     n_samples, t_max, seed);
        } else if (functional == "average-growth") {
            if (est_horizon->count() == 0) {
                double min_rate = 0.0;
                for (int i = 0; i < model.n; ++i)
                    for (int a = 0; a < model.num_actions(i); ++a)
                        for (int j = 0; j < model.n; ++j) {
                            const double r = model.rates[i][a][j];
                            if (j != i && r > 0.0 && (min_rate == 0.0 || r < min_rate))
                                min_rate = r;
                        }
                horizon = min_rate > 0.0 ? 100.0 / min_rate : 100.0;
            }
            est = mc_average_growth(model, policy, theta, horizon, start, n_samples, seed);
        } else if (functional == "exp-hitting") {
            if (!cert_path.empty()) {
                auto cert = load_certificate(cert_path);
                est = mc_exp_hitting(model, policy, eta, start, n_samples, seed, &cert);
            } else {
                est = mc_exp_hitting(model, policy, eta, start, n_samples, seed);
            }
        } else { // poisson-h
            auto eval = evaluate_policy(model, policy, theta);
            est = mc_poisson_h(model, policy, theta, eval.rho, start, n_samples, seed);
            doc["rho"] = eval.rho;
            doc["h_eigen"] = eval.h[static_cast<std::size_t>(start)];
        }
        doc["subcommand"] = "estimate";
        doc["config"] = {{"model", model_path}, {"functional", functional},
                         {"policy", policy}, {"theta", theta}, {"alpha", alpha},
                         {"eta", eta}, {"T", horizon}, {"t_max", t_max}, {"start", start},
                         {"N", n_samples}, {"seed", seed}};
        doc["estimate"] = estimate_doc(est);
        out.emit(doc);
        return 0;
    }

    if (lyap_cmd->parsed()) {
        auto model = load_model_file(model_path);
        auto cert = load_certificate(cert_path);
        auto report = check_lyapunov(model, cert);
        doc["subcommand"] = "check-lyapunov";
        doc["config"] = {{"model", model_path}, {"cert", cert_path}, {"theta", theta}};
        doc["margins"] = report.margins;
        doc["holds"] = report.holds;
        doc["max_theta"] = std::isfinite(report.max_theta) ? ordered_json(report.max_theta)
                                                           : ordered_json("inf");
        doc["theta_cost_below_delta"] = theta < report.max_theta;
        out.emit(doc);
        return 0;
    }

    if (cross_cmd->parsed()) {
        auto model = load_model_file(model_path);
        doc["subcommand"] = "crosscheck";
        doc["config"] = {{"kind", which}, {"model", model_path}, {"theta", theta},
                         {"alpha", alpha}, {"T", horizon}, {"K", steps_k}, {"L", steps_l},
                         {"N", n_samples}, {"seed", seed}, {"se_mult", se_mult}};
        ordered_json checks = ordered_json::array();
        bool all_pass = true;

        auto record = [&](const std::string& name, double solver_value, double mc_value,
                          double tolerance) {
            const bool pass = std::fabs(solver_value - mc_value) <= tolerance;
            all_pass = all_pass && pass;
            checks.push_back({{"name", name}, {"solver", solver_value}, {"mc", mc_value},
                              {"tolerance", tolerance}, {"pass", pass}});
            std::cerr << (pass ? "PASS " : "FAIL ") << name << ": solver=" << solver_value
                      << " mc=" << mc_value << " tol=" << tolerance << "\n";
        };

        if (which == "finite") {
            auto sol = solve_finite_horizon(model, theta, horizon, steps_k);
            for (int i = 0; i < model.n; ++i) {
                auto est = mc_finite_cost(model, sol.policy, theta, horizon, i, n_samples,
                                          seed + static_cast<std::uint64_t>(i));
                record("psi(0," + std::to_string(i) + ")", sol.grid.psi[0][i], est.ce,
                       se_mult * est.ce_std_error);
            }
        } else if (which == "discounted") {
            const double t_trunc = 9.5 / alpha;
            const double eps = theta * std::exp(-alpha * t_trunc) * 0.5;
            const int steps = std::max(steps_l, 200000);
            auto sol = solve_eps(model, alpha, eps, std::min(0.95, theta * 1.1), steps);
            auto theta_selector = [&](double t, int state) {
                return discounted_policy_at_time(sol, theta, t).action[state];
            };
            auto row = discounted_policy_at_time(sol, theta, 0.0);
            std::size_t row_idx = 0;
            for (std::size_t k = 0; k < sol.theta_grid.size(); ++k)
                if (std::fabs(sol.theta_grid[k] - row.theta_used) <
                    std::fabs(sol.theta_grid[row_idx] - row.theta_used))
                    row_idx = k;
            for (int i = 0; i < model.n; ++i) {
                auto est = mc_discounted_cost(model, theta_selector, theta, alpha, i, n_samples,
                                              t_trunc, seed + static_cast<std::uint64_t>(i));
                record("W(" + std::to_string(theta) + "," + std::to_string(i) + ")",
                       sol.W[row_idx][i], est.mean,
                       se_mult * est.std_error + est.bias_bound);
            }
        } else { // average
            auto policy = parse_policy(policy_text, model);
            auto eval = evaluate_policy(model, policy, theta);
            double h_min = eval.h[0], h_max = eval.h[0];
            for (double x : eval.h) {
                h_min = std::min(h_min, x);
                h_max = std::max(h_max, x);
            }
            const double bias = std::log(h_max / h_min) / (theta * horizon);
            auto est = mc_average_growth(model, policy, theta, horizon, 0, n_samples, seed);
            record("rho", eval.rho, est.mean, se_mult * est.std_error + bias);
        }

        doc["checks"] = std::move(checks);
        doc["pass"] = all_pass;
        out.emit(doc);
        return all_pass ? 0 : 3;
    }

    return 64;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
