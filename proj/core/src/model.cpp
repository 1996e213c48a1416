#include "rsctmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rsctmc/errors.hpp"

namespace rsctmc {

namespace {

std::string at(int i, int a) {
    return "state " + std::to_string(i) + ", action " + std::to_string(a);
}

}  // namespace

void check_model(const CtmdpModel& model, double diag_tol) {
    if (model.n <= 0) throw ValidationError("model has no states (n must be >= 1)");
    const auto n = static_cast<std::size_t>(model.n);
    if (model.actions.size() != n || model.rates.size() != n || model.cost.size() != n)
        throw ValidationError("actions/rates/cost must each have one entry per state");
    if (model.terminal.size() != n)
        throw ValidationError("terminal cost vector has wrong length");

    for (int i = 0; i < model.n; ++i) {
        if (model.actions[i].empty())
            throw ValidationError("state " + std::to_string(i) + " has an empty action set");
        std::set<std::string> labels(model.actions[i].begin(), model.actions[i].end());
        if (labels.size() != model.actions[i].size())
            throw ValidationError("state " + std::to_string(i) + " has duplicate action labels");
        if (model.rates[i].size() != model.actions[i].size() ||
            model.cost[i].size() != model.actions[i].size())
            throw ValidationError("state " + std::to_string(i) +
                                  ": rates/cost rows do not match the action list");
        for (int a = 0; a < model.num_actions(i); ++a) {
            const auto& row = model.rates[i][a];
            if (row.size() != n)
                throw ValidationError("rate row has wrong length at " + at(i, a));
            double off_sum = 0.0;
            for (int j = 0; j < model.n; ++j) {
                if (!std::isfinite(row[j]))
                    throw ValidationError("non-finite rate at " + at(i, a) + ", target " +
                                          std::to_string(j));
                if (j == i) continue;
                if (row[j] < 0.0)
                    throw ValidationError("negative rate at " + at(i, a) + ", target " +
                                          std::to_string(j));
                off_sum += row[j];
            }
            if (std::fabs(row[i] + off_sum) > diag_tol)
                throw ValidationError("diagonal entry at " + at(i, a) +
                                      " does not equal the negative off-diagonal sum");
            if (!std::isfinite(model.cost[i][a]) || model.cost[i][a] < 0.0)
                throw ValidationError("cost must be finite and >= 0 at " + at(i, a));
        }
        if (!std::isfinite(model.terminal[i]) || model.terminal[i] < 0.0)
            throw ValidationError("terminal cost must be finite and >= 0 at state " +
                                  std::to_string(i));
    }
}

void normalize_diagonals(CtmdpModel& model) {
    for (int i = 0; i < model.n; ++i) {
        for (auto& row : model.rates[i]) {
            double off_sum = 0.0;
            for (int j = 0; j < model.n; ++j)
                if (j != i) off_sum += row[j];
            row[i] = -off_sum;
        }
    }
}

ModelDiagnostics validate(const CtmdpModel& model) {
    ModelDiagnostics d;
    for (int i = 0; i < model.n; ++i) {
        d.terminal_sup = std::max(d.terminal_sup, model.terminal[i]);
        for (int a = 0; a < model.num_actions(i); ++a) {
            d.M = std::max(d.M, model.exit_rate(i, a));
            d.cost_sup = std::max(d.cost_sup, model.cost[i][a]);
            double sum = 0.0;
            for (int j = 0; j < model.n; ++j) sum += model.rates[i][a][j];
            d.row_sum_err = std::max(d.row_sum_err, std::fabs(sum));
        }
    }
    d.irreducible_all = irreducible_under_all(model);
    return d;
}

bool irreducible_under(const CtmdpModel& model, const StationaryPolicy& policy) {
    check_policy(model, policy);
    const int n = model.n;
    if (n == 1) return true;
    // Strong connectivity via forward reachability from 0 plus reachability
    // to 0 (backward BFS on the same support graph).
    auto bfs = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w = 0; w < n; ++w) {
                if (seen[w] || w == v) continue;
                double rate = forward ? model.rates[v][policy[v]][w]
                                      : model.rates[w][policy[w]][v];
                if (rate > 0.0) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return seen;
    };
    auto fwd = bfs(true);
    auto bwd = bfs(false);
    for (int v = 0; v < n; ++v)
        if (!fwd[v] || !bwd[v]) return false;
    return true;
}

bool irreducible_under_all(const CtmdpModel& model) {
    const int n = model.n;
    if (n == 1) return true;
    // i reaches j under every policy iff i enters the fixed point of
    //   F = {j} union { i : for all a in U_i, supp(i,a) meets F }.
    for (int j = 0; j < n; ++j) {
        std::vector<char> in(n, 0);
        in[j] = 1;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int i = 0; i < n; ++i) {
                if (in[i]) continue;
                bool all_actions_enter = true;
                for (int a = 0; a < model.num_actions(i) && all_actions_enter; ++a) {
                    bool enters = false;
                    for (int k = 0; k < n; ++k) {
                        if (k != i && in[k] && model.rates[i][a][k] > 0.0) {
                            enters = true;
                            break;
                        }
                    }
                    all_actions_enter = enters;
                }
                if (all_actions_enter) {
                    in[i] = 1;
                    grew = true;
                }
            }
        }
        for (int i = 0; i < n; ++i)
            if (!in[i]) return false;
    }
    return true;
}

void check_policy(const CtmdpModel& model, const StationaryPolicy& policy) {
    if (policy.size() != static_cast<std::size_t>(model.n))
        throw ValidationError("policy length does not match the number of states");
    for (int i = 0; i < model.n; ++i)
        if (policy[i] < 0 || policy[i] >= model.num_actions(i))
            throw ValidationError("policy selects invalid action " + std::to_string(policy[i]) +
                                  " at state " + std::to_string(i));
}

long long policy_count(const CtmdpModel& model, long long cap) {
    long long count = 1;
    for (int i = 0; i < model.n; ++i) {
        count *= model.num_actions(i);
        if (count > cap) return cap + 1;
    }
    return count;
}

}  // namespace rsctmc
