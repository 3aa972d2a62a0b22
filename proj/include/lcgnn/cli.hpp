#pragma once

#include "lcgnn/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lcgnn::cli {

enum class Subcommand { train, evaluate, ablate, sparse, consistency, selftest };

struct Command {
    Subcommand subcommand = Subcommand::selftest;
    std::filesystem::path data;
    std::filesystem::path out = "results";
    std::filesystem::path checkpoint;  // evaluate; defaults to <out>/checkpoint.json
    std::vector<std::uint64_t> seeds;
    std::optional<double> lambda;      // unset: per-dataset default
    std::optional<Variant> variant;    // unset: full (evaluate: taken from the checkpoint)
    TrainConfig config;                // every other hyperparameter
    std::size_t labels_per_class = 5;
    std::size_t buckets = 10;
};

/// Either a command or a usage message. `exit_code` is 0 for --help.
struct ParseOutcome {
    std::optional<Command> command;
    int exit_code = 0;
    std::string message;
};

/// `args` excludes the program name. Never throws.
ParseOutcome parse_args(std::span<const std::string> args);

/// Runs the command and returns the process exit status.
int execute(const Command& command, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace lcgnn::cli
