#include "lcgnn/report.hpp"

namespace lcgnn {

using nlohmann::json;

json config_json(const TrainConfig& c) {
    return {{"lr", c.lr},
            {"weight_decay", c.weight_decay},
            {"lambda", c.lambda},
            {"epochs", c.epochs},
            {"pretrain_epochs", c.pretrain_epochs},
            {"hidden", c.hidden},
            {"dropout", c.dropout},
            {"seed", c.seed},
            {"variant", to_string(c.variant)},
            {"loss_reduction", to_string(c.reduction)}};
}

json run_json(const Dataset& dataset, const TrainConfig& config, const RunResult& run,
              const Accuracy& acc) {
    json history = json::array();
    for (const auto& e : run.history) {
        history.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_acc", e.val_acc}});
    }
    return {{"dataset", dataset.name},
            {"config", config_json(config)},
            {"best_epoch", run.best_epoch},
            {"best_val_acc", run.best_val_acc},
            {"train_acc", acc.train},
            {"val_acc", acc.val},
            {"test_acc", run.test_acc},
            {"history", std::move(history)}};
}

json table_json(const ExperimentTable& table, const TrainConfig& config) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"variant", to_string(r.variant)},
                        {"method", display_name(r.variant)},
                        {"mean", r.test.mean},
                        {"std", r.test.stddev},
                        {"test_acc", r.test.values}});
    }
    json runs = json::array();
    for (const auto& r : table.runs) {
        runs.push_back({{"variant", to_string(r.variant)},
                        {"seed", r.seed},
                        {"test_acc", r.test_acc},
                        {"best_val_acc", r.best_val_acc},
                        {"best_epoch", r.best_epoch}});
    }
    return {{"title", table.title},
            {"dataset", table.dataset},
            {"column", table.column},
            {"config", config_json(config)},
            {"rows", std::move(rows)},
            {"runs", std::move(runs)}};
}

json curve_json(const ConsistencyCurve& curve) {
    json buckets = json::array();
    for (std::size_t b = 0; b < curve.buckets(); ++b) {
        buckets.push_back({{"lo", curve.edges[b]},
                           {"hi", curve.edges[b + 1]},
                           {"count", curve.counts[b]},
                           {"accuracy", curve.accuracy[b] ? json(*curve.accuracy[b]) : json(nullptr)}});
    }
    return {{"buckets", std::move(buckets)}, {"spearman", curve_trend(curve)}};
}

}  // namespace lcgnn
