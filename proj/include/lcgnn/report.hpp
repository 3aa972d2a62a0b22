#pragma once

#include "lcgnn/analysis.hpp"
#include "lcgnn/trainer.hpp"

#include <json.hpp>

namespace lcgnn {

nlohmann::json config_json(const TrainConfig& config);

/// Config echo, per-epoch history, best epoch and final accuracies.
nlohmann::json run_json(const Dataset& dataset, const TrainConfig& config, const RunResult& run,
                        const Accuracy& final_accuracy);

nlohmann::json table_json(const ExperimentTable& table, const TrainConfig& config);

nlohmann::json curve_json(const ConsistencyCurve& curve);

}  // namespace lcgnn
