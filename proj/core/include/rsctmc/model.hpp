#pragma once

#include <string>
#include <vector>

namespace rsctmc {

using Matrix = std::vector<std::vector<double>>;

/// Action index per state.
using StationaryPolicy = std::vector<int>;

/// Finite controlled Markov chain in continuous time.
///
/// States are 0..n-1; state 0 is the distinguished reference state (hitting
/// time tau_0, eigenfunction normalization h(0)=1). Each state carries an
/// ordered list of action labels; `rates[i][a]` is the full generator row for
/// action a at state i, with rates[i][a][i] = -sum of the off-diagonal
/// entries. Running cost c(i,a) >= 0 per unit time, terminal cost g(i) >= 0.
struct CtmdpModel {
    int n = 0;
    std::vector<std::vector<std::string>> actions;       // [i] -> labels, ordered
    std::vector<std::vector<std::vector<double>>> rates; // [i][a] -> length-n row
    std::vector<std::vector<double>> cost;               // [i][a]
    std::vector<double> terminal;                        // [i]

    int num_actions(int i) const { return static_cast<int>(actions[i].size()); }
    double exit_rate(int i, int a) const { return -rates[i][a][i]; }
};

struct ModelDiagnostics {
    double M = 0.0;            // uniform bound on exit rates, max_{i,a} -lambda_ii(a)
    double cost_sup = 0.0;     // max_{i,a} c(i,a)
    double terminal_sup = 0.0; // max_i g(i)
    double row_sum_err = 0.0;  // max |sum_j rates[i][a][j]|
    bool irreducible_all = false; // irreducible under every stationary policy
};

/// Structural validation. Throws ValidationError naming the offending
/// state/action on negative off-diagonal rates, negative costs, empty action
/// sets, dimension mismatches, or diagonal entries off by more than `diag_tol`
/// from the negative off-diagonal sum.
void check_model(const CtmdpModel& model, double diag_tol = 1e-9);

/// Recompute every diagonal entry as the negative off-diagonal sum.
void normalize_diagonals(CtmdpModel& model);

/// Pure report over a structurally well-formed model. Never throws for
/// reducible chains; it just sets irreducible_all = false.
ModelDiagnostics validate(const CtmdpModel& model);

/// True iff the support graph of the chain under `policy` is strongly
/// connected.
bool irreducible_under(const CtmdpModel& model, const StationaryPolicy& policy);

/// True iff the chain is irreducible under every stationary policy.
/// Computed without enumeration: state i can reach j under all policies iff
/// i lies in the least fixed point grown from {j} by "every action has some
/// supported transition into the set".
bool irreducible_under_all(const CtmdpModel& model);

/// Throws ValidationError unless `policy` has one valid action index per state.
void check_policy(const CtmdpModel& model, const StationaryPolicy& policy);

/// Number of stationary policies, capped at `cap` (returns cap+1 once exceeded).
long long policy_count(const CtmdpModel& model, long long cap = 1000000);

}  // namespace rsctmc
