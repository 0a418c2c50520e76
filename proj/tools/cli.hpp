#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "whiteout/simulator.hpp"

namespace whiteout::cli {

// Entry point. Writes the result JSON (or an error JSON) to out.
// Exit codes: 0 success, 2 validation or input failure, 1 anything else.
int run(int argc, const char* const* argv, std::ostream& out);

nlohmann::json constants_json(const std::vector<double>& alphas, std::optional<double> delta);

// Scenario JSON -> MonteCarloConfig; unknown keys are rejected.
MonteCarloConfig config_from_json(const nlohmann::json& j);

}  // namespace whiteout::cli
