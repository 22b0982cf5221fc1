#include "procure/cli/commands.hpp"

int main(int argc, char** argv) { return procure::cli::main(argc, argv); }
