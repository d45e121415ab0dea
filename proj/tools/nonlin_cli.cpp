#include "nonlin/harness/cli.hpp"

int main(int argc, char** argv) { return nonlin::harness::cli_main(argc, argv); }
