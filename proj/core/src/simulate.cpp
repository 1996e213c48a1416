#include "rsctmc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsctmc/errors.hpp"
#include "rsctmc/rng.hpp"

namespace rsctmc {

namespace {

double sup_exit_rate(const CtmdpModel& model) {
    double m = 0.0;
    for (int i = 0; i < model.n; ++i)
        for (int a = 0; a < model.num_actions(i); ++a) m = std::max(m, model.exit_rate(i, a));
    return m;
}

double sup_cost(const CtmdpModel& model) {
    double s = 0.0;
    for (int i = 0; i < model.n; ++i)
        for (double c : model.cost[i]) s = std::max(s, c);
    return s;
}

/// Pairwise sum in a fixed tree order; the reduction order is part of the
/// reproducibility contract.
double pairwise_sum(const double* data, std::size_t count) {
    if (count <= 8) {
        double acc = 0.0;
        for (std::size_t k = 0; k < count; ++k) acc += data[k];
        return acc;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

struct LogMoments {
    double mean;      // sample mean of e^{x}
    double std_error; // SE of that mean
    double log_mean;  // log of the sample mean, computed shift-stably
};

/// Sample moments of e^{x_k} from log-domain samples via max-shifted
/// accumulation, so large exponents never overflow.
LogMoments exp_moments(const std::vector<double>& logs) {
    const auto n = logs.size();
    const double shift = *std::max_element(logs.begin(), logs.end());
    std::vector<double> terms(n);
    for (std::size_t k = 0; k < n; ++k) terms[k] = std::exp(logs[k] - shift);
    const double s1 = pairwise_sum(terms.data(), n);
    for (std::size_t k = 0; k < n; ++k) terms[k] = std::exp(2.0 * (logs[k] - shift));
    const double s2 = pairwise_sum(terms.data(), n);

    LogMoments m;
    m.log_mean = shift + std::log(s1 / static_cast<double>(n));
    m.mean = std::exp(m.log_mean);
    if (n > 1) {
        // var = (m2 - mean^2) * n/(n-1), assembled from shifted sums
        const double m2_over_mean2 = s2 * static_cast<double>(n) / (s1 * s1);
        const double var_rel = std::max(0.0, m2_over_mean2 - 1.0) * static_cast<double>(n) /
                               (static_cast<double>(n) - 1.0);
        m.std_error = m.mean * std::sqrt(var_rel / static_cast<double>(n));
    } else {
        m.std_error = 0.0;
    }
    return m;
}

struct StepSampler {
    const CtmdpModel& model;
    SplitMix64 rng;

    double sojourn(int state, int action) {
        const double rate = model.exit_rate(state, action);
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(rng.uniform_open()) / rate;
    }

    int next_state(int state, int action) {
        const double rate = model.exit_rate(state, action);
        double u = rng.uniform_open() * rate;
        const auto& row = model.rates[state][action];
        for (int j = 0; j < model.n; ++j) {
            if (j == state || row[j] <= 0.0) continue;
            if (u < row[j]) return j;
            u -= row[j];
        }
        // Rounding pushed u past the last positive entry; take it.
        for (int j = model.n - 1; j >= 0; --j)
            if (j != state && row[j] > 0.0) return j;
        throw NumericalError("jump from state " + std::to_string(state) +
                             " has no positive exit rates");
    }
};

// Integrate over completed sojourns; a path that ends by hitting state 0 has
// no sojourn at its final state, so actions, not states, set the count.
double cost_integral(const CtmdpModel& model, const Trajectory& traj, double offset = 0.0) {
    double integral = 0.0;
    for (std::size_t s = 0; s < traj.actions.size(); ++s) {
        const double lo = traj.times[s];
        const double hi = s + 1 < traj.times.size() ? traj.times[s + 1] : traj.t_end;
        integral += (model.cost[traj.states[s]][traj.actions[s]] - offset) * (hi - lo);
    }
    return integral;
}

}  // namespace

ActionSelector stationary_selector(StationaryPolicy policy) {
    return [policy = std::move(policy)](double, int state) { return policy[state]; };
}

ActionSelector markov_selector(MarkovPolicy policy) {
    return [policy = std::move(policy)](double t, int state) { return policy.at(t, state); };
}

Trajectory simulate(const CtmdpModel& model, const ActionSelector& select, int start, double t0,
                    std::optional<double> t_end, bool stop_at_zero, std::uint64_t seed) {
    if (start < 0 || start >= model.n) throw ValidationError("start state out of range");
    if (stop_at_zero == t_end.has_value())
        throw ValidationError("simulate needs exactly one of: a horizon, or stop_at_zero");
    const double rate_bound = sup_exit_rate(model);
    const double guard =
        t0 + (rate_bound > 0.0 ? 1e6 / rate_bound : 1e6); // non-termination guard

    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.push_back(start);

    StepSampler sampler{model, SplitMix64(seed)};
    double t = t0;
    int state = start;
    // Under stop_at_zero a start at 0 means: take the first exit, then run
    // until the chain returns to 0.
    while (true) {
        const int action = select(t, state);
        if (action < 0 || action >= model.num_actions(state))
            throw ValidationError("selector returned invalid action at state " +
                                  std::to_string(state));
        traj.actions.push_back(action);
        const double dwell = sampler.sojourn(state, action);

        if (std::isinf(dwell)) { // absorbing under this action
            if (stop_at_zero && state != 0)
                throw NumericalError("absorbed at state " + std::to_string(state) +
                                     " before hitting 0 (all exit rates zero)");
            traj.t_end = t_end ? *t_end : t;
            return traj;
        }
        const double t_next = t + dwell;
        if (t_end && t_next >= *t_end) {
            traj.t_end = *t_end;
            return traj;
        }
        if (t_next > guard)
            throw NumericalError("non-termination guard tripped at t > " + std::to_string(guard) +
                                 "; the policy likely cannot reach state 0");
        state = sampler.next_state(state, action);
        t = t_next;
        traj.times.push_back(t);
        traj.states.push_back(state);
        if (stop_at_zero && state == 0) {
            traj.t_end = t;
            return traj;
        }
    }
}

McEstimate mc_finite_cost(const CtmdpModel& model, const MarkovPolicy& policy, double theta,
                          double horizon, int start, long n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("need at least one sample");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    auto select = markov_selector(policy);

    std::vector<double> logs(static_cast<std::size_t>(n_samples));
    for (long k = 0; k < n_samples; ++k) {
        auto traj = simulate(model, select, start, 0.0, horizon, false,
                             trajectory_stream_seed(seed, static_cast<std::uint64_t>(k)));
        const double total = cost_integral(model, traj) + model.terminal[traj.states.back()];
        logs[static_cast<std::size_t>(k)] = theta * total;
    }
    auto m = exp_moments(logs);
    McEstimate est;
    est.mean = m.mean;
    est.std_error = m.std_error;
    est.n_samples = n_samples;
    est.functional = "E[exp(theta (int_0^T c dt + g(X_T)))]";
    est.seed = seed;
    est.ce = m.log_mean / theta;
    est.ce_std_error = m.mean > 0.0 ? m.std_error / (theta * m.mean) : 0.0;
    return est;
}

McEstimate mc_discounted_cost(const CtmdpModel& model, const ActionSelector& select, double theta,
                              double alpha, int start, long n_samples, double t_max,
                              std::uint64_t seed, double bias_tol) {
    if (n_samples < 1) throw ValidationError("need at least one sample");
    if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
    const double tail_factor =
        std::exp(theta * sup_cost(model) * std::exp(-alpha * t_max) / alpha) - 1.0;
    if (!(tail_factor < bias_tol))
        throw ValidationError("t_max too small: truncation factor " +
                              std::to_string(tail_factor) + " exceeds bias tolerance " +
                              std::to_string(bias_tol));

    std::vector<double> logs(static_cast<std::size_t>(n_samples));
    for (long k = 0; k < n_samples; ++k) {
        auto traj = simulate(model, select, start, 0.0, t_max, false,
                             trajectory_stream_seed(seed, static_cast<std::uint64_t>(k)));
        double integral = 0.0;
        for (std::size_t s = 0; s < traj.actions.size(); ++s) {
            const double lo = traj.times[s];
            const double hi = s + 1 < traj.times.size() ? traj.times[s + 1] : traj.t_end;
            // closed form of int_lo^hi e^{-alpha t} c dt over one sojourn
            integral += model.cost[traj.states[s]][traj.actions[s]] *
                        (std::exp(-alpha * lo) - std::exp(-alpha * hi)) / alpha;
        }
        logs[static_cast<std::size_t>(k)] = theta * integral;
    }
    auto m = exp_moments(logs);
    McEstimate est;
    est.mean = m.mean;
    est.std_error = m.std_error;
    est.n_samples = n_samples;
    est.functional = "E[exp(theta int_0^inf e^{-alpha t} c dt)]";
    est.seed = seed;
    est.bias_bound = m.mean * tail_factor;
    return est;
}

McEstimate mc_average_growth(const CtmdpModel& model, const StationaryPolicy& policy,
                             double theta, double horizon, int start, long n_samples,
                             std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("need at least one sample");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
    auto select = stationary_selector(policy);

    std::vector<double> logs(static_cast<std::size_t>(n_samples));
    for (long k = 0; k < n_samples; ++k) {
        auto traj = simulate(model, select, start, 0.0, horizon, false,
                             trajectory_stream_seed(seed, static_cast<std::uint64_t>(k)));
        logs[static_cast<std::size_t>(k)] = theta * cost_integral(model, traj);
    }
    auto m = exp_moments(logs);
    McEstimate est;
    est.mean = m.log_mean / (theta * horizon);
    est.std_error = m.mean > 0.0 ? m.std_error / (theta * horizon * m.mean) : 0.0;
    est.n_samples = n_samples;
    est.functional = "(1/(theta T)) log E[exp(theta int_0^T c dt)]";
    est.seed = seed;
    return est;
}

McEstimate mc_exp_hitting(const CtmdpModel& model, const StationaryPolicy& policy, double eta,
                          int start, long n_samples, std::uint64_t seed,
                          const LyapunovCertificate* cert) {
    if (n_samples < 1) throw ValidationError("need at least one sample");
    if (cert && !(eta < cert->delta))
        throw ValidationError("eta must be below the certificate's delta");
    auto select = stationary_selector(policy);

    std::vector<double> logs(static_cast<std::size_t>(n_samples));
    for (long k = 0; k < n_samples; ++k) {
        auto traj = simulate(model, select, start, 0.0, std::nullopt, true,
                             trajectory_stream_seed(seed, static_cast<std::uint64_t>(k)));
        logs[static_cast<std::size_t>(k)] = eta * traj.t_end;
    }
    auto m = exp_moments(logs);
    McEstimate est;
    est.mean = m.mean;
    est.std_error = m.std_error;
    est.n_samples = n_samples;
    est.functional = "E[exp(eta tau_0)]";
    est.seed = seed;
    if (cert) {
        est.certificate_bound = std::exp(cert->V[static_cast<std::size_t>(start)]);
        est.has_certificate_bound = true;
    }
    return est;
}

McEstimate mc_poisson_h(const CtmdpModel& model, const StationaryPolicy& policy, double theta,
                        double rho, int start, long n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("need at least one sample");
    auto select = stationary_selector(policy);

    std::vector<double> logs(static_cast<std::size_t>(n_samples));
    for (long k = 0; k < n_samples; ++k) {
        auto traj = simulate(model, select, start, 0.0, std::nullopt, true,
                             trajectory_stream_seed(seed, static_cast<std::uint64_t>(k)));
        logs[static_cast<std::size_t>(k)] = theta * cost_integral(model, traj, rho);
    }
    auto m = exp_moments(logs);
    McEstimate est;
    est.mean = m.mean;
    est.std_error = m.std_error;
    est.n_samples = n_samples;
    est.functional = "E[exp(theta int_0^{tau_0} (c - rho) dt)]";
    est.seed = seed;
    return est;
}

}  // namespace rsctmc
