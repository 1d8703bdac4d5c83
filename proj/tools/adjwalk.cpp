#include "adjwalk/cli/commands.hpp"

int main(int argc, char** argv) { return adjwalk::cli::main_entry(argc, argv); }
