#include "bethe_cli/cli.hpp"

int main(int argc, char** argv) { return bethe::cli::run(argc, argv); }
