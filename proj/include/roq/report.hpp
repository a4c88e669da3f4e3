#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace roq {

/// One computed bound: which formula, on which inputs, what came out,
/// and which preconditions were checked along the way.
struct BoundReport {
    std::string formula_id;
    double value = 0.0;
    nlohmann::json inputs;
    nlohmann::json preconditions; // name -> bool
    std::vector<std::string> notes;

    nlohmann::json to_json() const {
        return {
            {"formula_id", formula_id},
            {"value", value},
            {"inputs", inputs},
            {"preconditions_checked", preconditions},
            {"notes", notes},
        };
    }
};

} // namespace roq
