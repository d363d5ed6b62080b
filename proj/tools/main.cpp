#include "mil/cli/commands.hpp"

int main(int argc, char** argv) { return mil::cli::run(argc, argv); }
