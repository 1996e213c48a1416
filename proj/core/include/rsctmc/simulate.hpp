#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsctmc/average_eigen.hpp"
#include "rsctmc/finite_horizon.hpp"
#include "rsctmc/model.hpp"

namespace rsctmc {

/// One sampled path. states[k] is occupied on [times[k], times[k+1]) under
/// actions[k]; the final sojourn ends at t_end. A path that ends by hitting
/// state 0 has no sojourn at its final state, so there actions is one entry
/// shorter than states; horizon-bounded paths have one action per state.
struct Trajectory {
    std::vector<double> times;
    std::vector<int> states;
    std::vector<int> actions;
    double t_end = 0.0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
    std::string functional;
    std::uint64_t seed = 0;
    double bias_bound = 0.0;     // truncation / finite-horizon bias, when applicable
    double ce = 0.0;             // certainty equivalent (1/theta) log mean, when applicable
    double ce_std_error = 0.0;   // delta-method SE of the certainty equivalent
    double certificate_bound = 0.0; // e^{V(start)} when a certificate was supplied
    bool has_certificate_bound = false;
};

/// Action as a function of (time, state). Must be pure for reproducibility.
using ActionSelector = std::function<int(double t, int state)>;

ActionSelector stationary_selector(StationaryPolicy policy);
ActionSelector markov_selector(MarkovPolicy policy);

/// Exact jump-chain simulation: sojourn ~ Exponential(-lambda_ii(a)), next
/// state drawn from the off-diagonal rates. An absorbing state holds until
/// t_end; under stop_at_zero an absorbing non-zero state (or any failure to
/// reach 0 by t0 + 1e6/M) throws NumericalError. The action is re-read from
/// the selector at each jump time and frozen over the sojourn. Deterministic
/// given the seed.
Trajectory simulate(const CtmdpModel& model, const ActionSelector& select, int start, double t0,
                    std::optional<double> t_end, bool stop_at_zero, std::uint64_t seed);

/// E[ exp( theta ( int_0^T c dt + g(X_T) ) ) ] from `start` under a Markov
/// policy, with the certainty equivalent (1/theta) log mean and its
/// delta-method SE.
McEstimate mc_finite_cost(const CtmdpModel& model, const MarkovPolicy& policy, double theta,
                          double horizon, int start, long n_samples, std::uint64_t seed);

/// E[ exp( theta int_0^inf e^{-alpha t} c dt ) ] from `start`, truncated at
/// t_max. The neglected tail multiplies each sample by at most
/// exp(theta ||c|| e^{-alpha t_max} / alpha); t_max must keep that factor - 1
/// below bias_tol.
McEstimate mc_discounted_cost(const CtmdpModel& model, const ActionSelector& select, double theta,
                              double alpha, int start, long n_samples, double t_max,
                              std::uint64_t seed, double bias_tol = 1e-4);

/// (1/(theta T)) log E[ exp( theta int_0^T c dt ) ] from `start` under a
/// stationary policy. The finite-horizon gap to the growth rate is bounded by
/// (1/(theta T)) log(max h / min h); callers who know h document it.
McEstimate mc_average_growth(const CtmdpModel& model, const StationaryPolicy& policy,
                             double theta, double horizon, int start, long n_samples,
                             std::uint64_t seed);

/// E[ e^{eta tau_0} ] from `start` under a stationary policy, where tau_0 is
/// the hitting time of state 0 (from state 0: first exit, then hit). When a
/// certificate is supplied, eta must be < delta and the estimate is compared
/// against e^{V(start)}.
McEstimate mc_exp_hitting(const CtmdpModel& model, const StationaryPolicy& policy, double eta,
                          int start, long n_samples, std::uint64_t seed,
                          const LyapunovCertificate* cert = nullptr);

/// E[ exp( theta int_0^{tau_0} (c - rho) dt ) ] from `start`; the stochastic
/// representation of the Poisson eigenfunction h(start).
McEstimate mc_poisson_h(const CtmdpModel& model, const StationaryPolicy& policy, double theta,
                        double rho, int start, long n_samples, std::uint64_t seed);

}  // namespace rsctmc
