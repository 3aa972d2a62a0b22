#include "lcgnn/cli.hpp"

int main(int argc, char** argv) { return lcgnn::cli::main(argc, argv); }
