#include "isolab/cli.hpp"

int main(int argc, char** argv) { return isolab::cli::main_entry(argc, argv); }
