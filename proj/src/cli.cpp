#include "lcgnn/cli.hpp"

#include "lcgnn/analysis.hpp"
#include "lcgnn/diagnostics.hpp"
#include "lcgnn/io.hpp"
#include "lcgnn/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <ostream>

namespace lcgnn::cli {

namespace fs = std::filesystem;

namespace {

std::optional<std::vector<std::uint64_t>> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::string_view rest = csv;
    while (true) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) return std::nullopt;
        seeds.push_back(v);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return seeds;
}

std::vector<std::uint64_t> default_seeds(Subcommand s) {
    if (s == Subcommand::ablate || s == Subcommand::sparse) return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return {1};
}

void print_line(std::ostream& out, const std::string& s) { out << s << '\n'; }

TrainConfig resolved_config(const Command& cmd, const Dataset& dataset) {
    TrainConfig c = cmd.config;
    c.lambda = cmd.lambda.value_or(default_lambda(dataset.name));
    c.variant = cmd.variant.value_or(Variant::full);
    c.seed = cmd.seeds.front();
    c.validate();
    return c;
}

int run_train(const Command& cmd, std::ostream& out) {
    const Dataset d = load_dataset(cmd.data);
    const TrainConfig c = resolved_config(cmd, d);
    const RunResult run = train_variant(d, c);
    const Accuracy acc = evaluate(run.best_params, d, head_for(c.variant));
    write_file_atomic(cmd.out / "result.json", run_json(d, c, run, acc).dump(2) + "\n");
    save_checkpoint(run.best_params, cmd.out / "checkpoint.json", std::string(to_string(c.variant)));
    out << d.name << " " << to_string(c.variant) << " seed=" << c.seed << " best_epoch=" << run.best_epoch
        << " val_acc=" << run.best_val_acc << " test_acc=" << run.test_acc << '\n';
    return 0;
}

int run_evaluate(const Command& cmd, std::ostream& out) {
    const Dataset d = load_dataset(cmd.data);
    const fs::path ckpt = cmd.checkpoint.empty() ? cmd.out / "checkpoint.json" : cmd.checkpoint;
    std::string stored;
    const GcnParams params = load_checkpoint(ckpt, &stored);
    Variant variant = Variant::full;
    if (cmd.variant) {
        variant = *cmd.variant;
    } else if (auto v = parse_variant(stored)) {
        variant = *v;
    }
    const Accuracy acc = evaluate(params, d, head_for(variant));
    const nlohmann::json j = {{"dataset", d.name},
                              {"checkpoint", ckpt.string()},
                              {"variant", to_string(variant)},
                              {"train_acc", acc.train},
                              {"val_acc", acc.val},
                              {"test_acc", acc.test}};
    write_file_atomic(cmd.out / "evaluation.json", j.dump(2) + "\n");
    out << d.name << " " << to_string(variant) << " train_acc=" << acc.train << " val_acc=" << acc.val
        << " test_acc=" << acc.test << '\n';
    return 0;
}

int run_ablate(const Command& cmd, std::ostream& out) {
    const Dataset d = load_dataset(cmd.data);
    const TrainConfig c = resolved_config(cmd, d);
    const ExperimentTable table = run_ablation(d, c, cmd.seeds, worker_threads());
    const std::string text = format_table(table);
    write_file_atomic(cmd.out / "ablation.json", table_json(table, c).dump(2) + "\n");
    write_file_atomic(cmd.out / "ablation.txt", text);
    out << text;
    return 0;
}

int run_sparse(const Command& cmd, std::ostream& out) {
    const Dataset d = load_dataset(cmd.data);
    const TrainConfig c = resolved_config(cmd, d);
    std::vector<Variant> variants{Variant::base_only};
    if (c.variant != Variant::base_only) variants.push_back(c.variant);
    const ExperimentTable table =
        run_sparse_experiment(d, cmd.labels_per_class, c, cmd.seeds, variants, worker_threads());
    const std::string text = format_table(table);
    const std::string stem = "sparse_" + std::to_string(cmd.labels_per_class);
    write_file_atomic(cmd.out / (stem + ".json"), table_json(table, c).dump(2) + "\n");
    write_file_atomic(cmd.out / (stem + ".txt"), text);
    out << text;
    return 0;
}

int run_consistency(const Command& cmd, std::ostream& out) {
    const Dataset d = load_dataset(cmd.data);
    TrainConfig c = resolved_config(cmd, d);
    c.variant = Variant::base_only;
    const RunResult run = train_variant(d, c);
    const auto predictions =
        argmax_rows(predict_distribution(make_gcn_input(d), run.best_params, Head::none));
    const ConsistencyCurve curve = consistency_accuracy_curve(d, predictions, cmd.buckets);
    nlohmann::json j = curve_json(curve);
    j["dataset"] = d.name;
    j["config"] = config_json(c);
    j["test_acc"] = run.test_acc;
    write_file_atomic(cmd.out / "consistency.tsv", curve_tsv(curve));
    write_file_atomic(cmd.out / "consistency.json", j.dump(2) + "\n");
    out << curve_tsv(curve) << "spearman=" << curve_trend(curve) << '\n';
    return 0;
}

int run_selftest(std::ostream& out) {
    bool ok = true;
    for (const CheckResult& r : lcgnn::run_selftest()) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": worst " << r.worst << " (limit "
            << r.threshold << ", " << r.detail << ")\n";
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

ParseOutcome parse_args(std::span<const std::string> args) {
    CLI::App app{"Label-consistency GCN for semi-supervised node classification", "lc_gnn"};
    app.require_subcommand(1);

    Command cmd;
    std::string seed_csv;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    std::string variant;
    std::string reduction;

    struct Bound {
        CLI::Option* seed = nullptr;
        CLI::Option* seeds = nullptr;
        CLI::Option* lambda = nullptr;
        CLI::Option* variant = nullptr;
        CLI::Option* reduction = nullptr;
    };
    std::vector<std::pair<CLI::App*, Bound>> subs;

    const auto add = [&](const char* name, const char* help, Subcommand s) {
        CLI::App* sub = app.add_subcommand(name, help);
        Bound b;
        sub->add_option("--data", cmd.data, "Canonical dataset directory");
        sub->add_option("--out", cmd.out, "Output directory")->capture_default_str();
        b.seed = sub->add_option("--seed", seed, "Random seed");
        b.seeds = sub->add_option("--seeds", seed_csv, "Comma-separated seeds");
        b.lambda = sub->add_option("--lambda", lambda, "Regularization weight (default: 2.0 cora, 1.0 otherwise)");
        sub->add_option("--lr", cmd.config.lr, "Adam learning rate")->capture_default_str();
        sub->add_option("--weight-decay", cmd.config.weight_decay, "Coupled L2 weight decay")->capture_default_str();
        sub->add_option("--epochs", cmd.config.epochs, "Training epochs")->capture_default_str();
        sub->add_option("--pretrain-epochs", cmd.config.pretrain_epochs, "Base GCN pretraining epochs")
            ->capture_default_str();
        sub->add_option("--hidden", cmd.config.hidden, "Hidden units")->capture_default_str();
        sub->add_option("--dropout", cmd.config.dropout, "Dropout rate")->capture_default_str();
        b.variant = sub->add_option("--variant", variant, "full | no_rl | no_lc_no_rl | base_only");
        b.reduction = sub->add_option("--loss-reduction", reduction, "mean | sum");
        if (s == Subcommand::sparse) {
            sub->add_option("--labels-per-class", cmd.labels_per_class, "Training labels per class")
                ->capture_default_str();
        }
        if (s == Subcommand::consistency) {
            sub->add_option("--buckets", cmd.buckets, "Consistency buckets")->capture_default_str();
        }
        if (s == Subcommand::evaluate) {
            sub->add_option("--checkpoint", cmd.checkpoint, "Checkpoint file (default: <out>/checkpoint.json)");
        }
        subs.emplace_back(sub, b);
        return sub;
    };
    add("train", "Train one model and write result.json and checkpoint.json", Subcommand::train);
    add("evaluate", "Score a checkpoint on every split", Subcommand::evaluate);
    add("ablate", "Run all variants over several seeds", Subcommand::ablate);
    add("sparse", "Compare GCN and LC-GCN on random sparse-label splits", Subcommand::sparse);
    add("consistency", "Accuracy of a trained GCN against neighbour label consistency", Subcommand::consistency);
    add("selftest", "Check the aggregation identity and the gradients", Subcommand::selftest);
    const Subcommand kinds[] = {Subcommand::train,  Subcommand::evaluate,    Subcommand::ablate,
                                Subcommand::sparse, Subcommand::consistency, Subcommand::selftest};

    std::vector<const char*> argv{"lc_gnn"};
    for (const auto& a : args) argv.push_back(a.c_str());

    ParseOutcome outcome;
    const auto usage_error = [&](const std::string& what, const CLI::App* scope) {
        outcome.command.reset();
        outcome.exit_code = 2;
        outcome.message = "error: " + what + "\n" + (scope ? scope->help() : app.help());
        return outcome;
    };

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const CLI::App* scope = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        outcome.message = scope->help();
        return outcome;
    } catch (const CLI::ParseError& e) {
        const CLI::App* scope = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
        return usage_error(e.what(), scope);
    } catch (const std::exception& e) {
        return usage_error(e.what(), nullptr);
    }

    std::size_t chosen = 0;
    while (chosen < subs.size() && !subs[chosen].first->parsed()) ++chosen;
    if (chosen == subs.size()) return usage_error("no subcommand given", nullptr);
    const CLI::App* sub = subs[chosen].first;
    const Bound& b = subs[chosen].second;
    cmd.subcommand = kinds[chosen];

    if (cmd.subcommand != Subcommand::selftest && cmd.data.empty()) {
        return usage_error("missing --data", sub);
    }
    if (b.seed->count() > 0 && b.seeds->count() > 0) {
        return usage_error("--seed and --seeds are mutually exclusive", sub);
    }
    if (b.seeds->count() > 0) {
        auto parsed = parse_seed_list(seed_csv);
        if (!parsed) return usage_error("--seeds expects comma-separated integers, got '" + seed_csv + "'", sub);
        cmd.seeds = std::move(*parsed);
    } else if (b.seed->count() > 0) {
        cmd.seeds = {seed};
    } else {
        cmd.seeds = default_seeds(cmd.subcommand);
    }
    if (cmd.subcommand == Subcommand::ablate && cmd.seeds.size() < 2) {
        return usage_error("ablate needs at least two seeds", sub);
    }
    if (b.lambda->count() > 0) cmd.lambda = lambda;
    if (b.variant->count() > 0) {
        cmd.variant = parse_variant(variant);
        if (!cmd.variant) return usage_error("unknown variant '" + variant + "'", sub);
    }
    if (b.reduction->count() > 0) {
        auto r = parse_reduction(reduction);
        if (!r) return usage_error("unknown loss reduction '" + reduction + "'", sub);
        cmd.config.reduction = *r;
    }
    if (cmd.buckets < 1) return usage_error("--buckets must be >= 1", sub);
    if (cmd.labels_per_class < 1) return usage_error("--labels-per-class must be >= 1", sub);
    try {
        TrainConfig probe = cmd.config;
        if (cmd.lambda) probe.lambda = *cmd.lambda;
        probe.validate();
    } catch (const std::exception& e) {
        return usage_error(e.what(), sub);
    }
    outcome.command = std::move(cmd);
    return outcome;
}

int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
    try {
        switch (cmd.subcommand) {
            case Subcommand::train: return run_train(cmd, out);
            case Subcommand::evaluate: return run_evaluate(cmd, out);
            case Subcommand::ablate: return run_ablate(cmd, out);
            case Subcommand::sparse: return run_sparse(cmd, out);
            case Subcommand::consistency: return run_consistency(cmd, out);
            case Subcommand::selftest: return run_selftest(out);
        }
    } catch (const std::exception& e) {
        print_line(err, std::string("error: ") + e.what());
        return 1;
    }
    return 1;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const ParseOutcome parsed = parse_args(args);
    if (!parsed.command) {
        (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message;
        return parsed.exit_code;
    }
    return execute(*parsed.command, std::cout, std::cerr);
}

}  // namespace lcgnn::cli
