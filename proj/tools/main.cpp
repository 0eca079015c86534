#include "cli/cli.hpp"

int main(int argc, char** argv) { return airob::cli::main_entry(argc, argv); }
