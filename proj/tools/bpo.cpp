#include "bpo/cli/commands.hpp"

int main(int argc, char** argv) { return bpo::cli::run(argc, argv); }
