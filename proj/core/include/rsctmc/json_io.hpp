#pragma once

#include <string>

#include "rsctmc/model.hpp"

namespace rsctmc {

/*
 * Model document (JSON):
 *
 *   {
 *     "n": 2,
 *     "actions":  [["a","b"], ["a"]],
 *     "rates":    [{"a": [-1.0, 1.0], "b": [-2.0, 2.0]}, {"a": [1.0, -1.0]}],
 *     "cost":     [{"a": 2.0, "b": 1.0}, {"a": 0.0}],
 *     "terminal": [0.0, 0.0]
 *   }
 *
 * rates[i] maps each label in actions[i] to a full length-n generator row.
 * The diagonal entry may be null, in which case it is recomputed as the
 * negative off-diagonal sum; if present it must match that sum to 1e-9.
 * "terminal" is optional and defaults to zeros. Numeric values round-trip
 * exactly (shortest-representation serialization).
 */

/// Parse and validate a model document. Throws ValidationError with the
/// offending state/action on any structural problem.
CtmdpModel load_model(const std::string& text);

/// Serialize back to the document format; load(serialize(m)) is bit-exact.
std::string serialize_model(const CtmdpModel& model);

CtmdpModel load_model_file(const std::string& path);

}  // namespace rsctmc
