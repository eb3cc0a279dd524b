#pragma once

#include "causalq/bias.hpp"
#include "causalq/discovery.hpp"

#include <json.hpp>

#include <ostream>

namespace causalq {

inline constexpr int kSchemaVersion = 1;

nlohmann::ordered_json to_json(const TestResult& r);
nlohmann::ordered_json to_json(const EffectEstimate& e);
nlohmann::ordered_json to_json(const BiasReport& report);
nlohmann::ordered_json to_json(const Dataset& ds, const ParentSearch& search);

/// Fixed-width table: one line per context and outcome with naive, total and direct deltas.
void write_summary(std::ostream& out, const BiasReport& report);

}  // namespace causalq
