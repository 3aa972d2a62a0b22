#include "lcgnn/cli.hpp"
#include "lcgnn/diagnostics.hpp"
#include "lcgnn/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

using namespace lcgnn;
namespace fs = std::filesystem;

namespace {

cli::ParseOutcome parse(std::vector<std::string> args) { return cli::parse_args(args); }

fs::path synthetic_dataset(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lcgnn_cli_" + name);
    fs::remove_all(dir);
    Dataset d = random_dataset(40, 8, 3, 0.1, 3);
    d.name = name;
    write_dataset(d, dir);
    return dir;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
    const auto parsed = cli::parse_args(args);
    if (!parsed.command) return parsed.exit_code;
    std::ostringstream out, err;
    const int rc = cli::execute(*parsed.command, out, err);
    if (out_text) *out_text = out.str() + err.str();
    return rc;
}

}  // namespace

TEST(CliParse, TrainDefaults) {
    const auto p = parse({"train", "--data", "d/cora"});
    ASSERT_TRUE(p.command);
    EXPECT_EQ(p.command->subcommand, cli::Subcommand::train);
    EXPECT_EQ(p.command->data, "d/cora");
    EXPECT_EQ(p.command->seeds, (std::vector<std::uint64_t>{1}));
    EXPECT_FALSE(p.command->lambda);
    EXPECT_EQ(p.command->config.epochs, 1000u);
    EXPECT_EQ(p.command->config.reduction, LossReduction::mean);
}

TEST(CliParse, OverridesAndSeedLists) {
    const auto p = parse({"ablate", "--data", "x", "--seeds", "3,5,8", "--lambda", "0.5", "--epochs", "20",
                          "--loss-reduction", "sum", "--variant", "no_rl"});
    ASSERT_TRUE(p.command) << p.message;
    EXPECT_EQ(p.command->seeds, (std::vector<std::uint64_t>{3, 5, 8}));
    EXPECT_EQ(p.command->lambda, 0.5);
    EXPECT_EQ(p.command->config.epochs, 20u);
    EXPECT_EQ(p.command->config.reduction, LossReduction::sum);
    EXPECT_EQ(p.command->variant, Variant::no_rl);
    EXPECT_EQ(parse({"ablate", "--data", "x"}).command->seeds.size(), 10u);
    EXPECT_EQ(parse({"sparse", "--data", "x", "--labels-per-class", "10"}).command->labels_per_class, 10u);
}

TEST(CliParse, DocumentedExamples) {
    const auto train = parse({"train", "--data", "cora/", "--lambda", "2.0", "--seed", "1"});
    ASSERT_TRUE(train.command);
    EXPECT_EQ(train.command->lambda, 2.0);
    EXPECT_EQ(train.command->seeds, (std::vector<std::uint64_t>{1}));
    const auto ablate = parse({"ablate", "--data", "cora/", "--seeds", "1,2,3"});
    ASSERT_TRUE(ablate.command);
    EXPECT_EQ(ablate.command->seeds.size(), 3u);
    EXPECT_EQ(parse({"train", "--data", "x", "--epochs", "ten"}).exit_code, 2);
}

TEST(CliParse, NeverThrowsOnArbitraryArguments) {
    const std::vector<std::string> pool{"train", "ablate", "selftest", "--data", "--seeds", "--lambda", "-1",
                                        "1,2", "--epochs", "0", "--help", "x", "", "--", "nan", "sparse"};
    std::uint64_t state = 12345;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::string> args;
        const int len = trial % 7;
        for (int k = 0; k < len; ++k) {
            state = state * 6364136223846793005ULL + 1442695040888963407ULL;
            args.push_back(pool[(state >> 33) % pool.size()]);
        }
        cli::ParseOutcome out;
        EXPECT_NO_THROW(out = cli::parse_args(args));
        EXPECT_TRUE(out.command.has_value() || !out.message.empty());
    }
}

TEST(CliParse, UsageErrors) {
    const auto missing = parse({"train"});
    EXPECT_FALSE(missing.command);
    EXPECT_EQ(missing.exit_code, 2);
    EXPECT_NE(missing.message.find("missing --data"), std::string::npos);

    EXPECT_EQ(parse({"train", "--data", "x", "--bogus"}).exit_code, 2);
    EXPECT_EQ(parse({"train", "--data", "x", "--variant", "gat"}).exit_code, 2);
    EXPECT_EQ(parse({"train", "--data", "x", "--seeds", "1,,2"}).exit_code, 2);
    EXPECT_EQ(parse({"train", "--data", "x", "--dropout", "1.5"}).exit_code, 2);
    EXPECT_EQ(parse({"ablate", "--data", "x", "--seed", "4"}).exit_code, 2);
    EXPECT_EQ(parse({}).exit_code, 2);
    EXPECT_TRUE(parse({"selftest"}).command);

    const auto help = parse({"--help"});
    EXPECT_FALSE(help.command);
    EXPECT_EQ(help.exit_code, 0);
    EXPECT_NE(help.message.find("selftest"), std::string::npos);
}

TEST(CliRun, TrainThenEvaluate) {
    const fs::path data = synthetic_dataset("train");
    const fs::path out = fs::temp_directory_path() / "lcgnn_cli_train_out";
    fs::remove_all(out);
    ASSERT_EQ(run({"train", "--data", data.string(), "--out", out.string(), "--epochs", "20",
                   "--pretrain-epochs", "10", "--seed", "2"}),
              0);
    const auto result = nlohmann::json::parse(read_file(out / "result.json"));
    EXPECT_EQ(result["dataset"], "train");
    EXPECT_EQ(result["config"]["seed"], 2);
    EXPECT_EQ(result["history"].size(), 20u);
    ASSERT_TRUE(fs::exists(out / "checkpoint.json"));

    ASSERT_EQ(run({"evaluate", "--data", data.string(), "--out", out.string()}), 0);
    const auto eval = nlohmann::json::parse(read_file(out / "evaluation.json"));
    EXPECT_EQ(eval["variant"], "full");
    EXPECT_EQ(eval["test_acc"], result["test_acc"]);
}

TEST(CliRun, RepeatedTrainingWritesIdenticalBytes) {
    const fs::path data = synthetic_dataset("determinism");
    const fs::path a = fs::temp_directory_path() / "lcgnn_cli_det_a";
    const fs::path b = fs::temp_directory_path() / "lcgnn_cli_det_b";
    for (const auto& out : {a, b}) {
        ASSERT_EQ(run({"train", "--data", data.string(), "--out", out.string(), "--epochs", "15",
                       "--pretrain-epochs", "5"}),
                  0);
    }
    EXPECT_EQ(read_file(a / "result.json"), read_file(b / "result.json"));
}

TEST(CliRun, ConsistencyAndSelftest) {
    const fs::path data = synthetic_dataset("curve");
    const fs::path out = fs::temp_directory_path() / "lcgnn_cli_curve";
    ASSERT_EQ(run({"consistency", "--data", data.string(), "--out", out.string(), "--epochs", "10",
                   "--buckets", "4"}),
              0);
    const auto curve = nlohmann::json::parse(read_file(out / "consistency.json"));
    EXPECT_EQ(curve["buckets"].size(), 4u);
    EXPECT_EQ(curve["config"]["variant"], "base_only");

    std::string text;
    EXPECT_EQ(run({"selftest"}, &text), 0);
    EXPECT_NE(text.find("PASS"), std::string::npos);
}

TEST(CliRun, MissingDatasetIsReported) {
    std::string text;
    EXPECT_EQ(run({"train", "--data", "/nonexistent/cora"}, &text), 1);
    EXPECT_NE(text.find("not found"), std::string::npos);
}
