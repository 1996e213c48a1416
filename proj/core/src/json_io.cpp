#include "rsctmc/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsctmc/errors.hpp"

namespace rsctmc {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

CtmdpModel load_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("model document does not parse: ") + e.what());
    }

    CtmdpModel model;
    try {
        model.n = doc.at("n").get<int>();
        if (model.n <= 0) throw ValidationError("n must be >= 1");
        const auto n = static_cast<std::size_t>(model.n);

        const auto& actions = doc.at("actions");
        if (!actions.is_array() || actions.size() != n)
            throw ValidationError("actions must list one label array per state");
        model.actions.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            model.actions[i] = actions[i].get<std::vector<std::string>>();

        const auto& rates = doc.at("rates");
        const auto& cost = doc.at("cost");
        if (!rates.is_array() || rates.size() != n)
            throw ValidationError("rates must have one action map per state");
        if (!cost.is_array() || cost.size() != n)
            throw ValidationError("cost must have one action map per state");

        model.rates.resize(n);
        model.cost.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (model.actions[i].empty())
                throw ValidationError("state " + std::to_string(i) + " has an empty action set");
            for (std::size_t a = 0; a < model.actions[i].size(); ++a) {
                const std::string& label = model.actions[i][a];
                if (!rates[i].contains(label))
                    throw ValidationError("state " + std::to_string(i) + " is missing a rate row "
                                          "for action '" + label + "'");
                const auto& row_json = rates[i].at(label);
                if (!row_json.is_array() || row_json.size() != n)
                    throw ValidationError("rate row for state " + std::to_string(i) +
                                          ", action '" + label + "' must have n entries");
                std::vector<double> row(n);
                double off_sum = 0.0;
                bool diagonal_given = true;
                for (std::size_t j = 0; j < n; ++j) {
                    if (row_json[j].is_null()) {
                        if (j != i)
                            throw ValidationError("only the diagonal entry may be null (state " +
                                                  std::to_string(i) + ", action '" + label + "')");
                        diagonal_given = false;
                        continue;
                    }
                    row[j] = row_json[j].get<double>();
                    if (j != i) {
                        if (row[j] < 0.0)
                            throw ValidationError(
                                "negative rate at state " + std::to_string(i) + ", action '" +
                                label + "', target " + std::to_string(j));
                        off_sum += row[j];
                    }
                }
                if (!diagonal_given)
                    row[i] = -off_sum;
                else if (std::fabs(row[i] + off_sum) > 1e-9)
                    throw ValidationError("diagonal entry disagrees with the negative "
                                          "off-diagonal sum at state " + std::to_string(i) +
                                          ", action '" + label + "'");
                model.rates[i].push_back(std::move(row));

                if (!cost[i].contains(label))
                    throw ValidationError("state " + std::to_string(i) + " is missing a cost for "
                                          "action '" + label + "'");
                model.cost[i].push_back(cost[i].at(label).get<double>());
            }
        }

        if (doc.contains("terminal"))
            model.terminal = doc.at("terminal").get<std::vector<double>>();
        else
            model.terminal.assign(n, 0.0);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model document is malformed: ") + e.what());
    }

    // Re-derive diagonals so row sums vanish to machine precision, then apply
    // the full structural checks.
    normalize_diagonals(model);
    check_model(model);
    return model;
}

std::string serialize_model(const CtmdpModel& model) {
    ordered doc;
    doc["n"] = model.n;
    doc["actions"] = model.actions;
    ordered rates = ordered::array();
    ordered cost = ordered::array();
    for (int i = 0; i < model.n; ++i) {
        ordered rate_map = ordered::object();
        ordered cost_map = ordered::object();
        for (int a = 0; a < model.num_actions(i); ++a) {
            rate_map[model.actions[i][a]] = model.rates[i][a];
            cost_map[model.actions[i][a]] = model.cost[i][a];
        }
        rates.push_back(std::move(rate_map));
        cost.push_back(std::move(cost_map));
    }
    doc["rates"] = std::move(rates);
    doc["cost"] = std::move(cost);
    doc["terminal"] = model.terminal;
    return doc.dump(2);
}

CtmdpModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_model(buffer.str());
}

}  // namespace rsctmc
