#include "mndt/cli.hpp"

int main(int argc, char** argv) { return mndt::cli::main(argc, argv); }
