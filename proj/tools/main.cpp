#include "ssbench/cli.hpp"

int main(int argc, char** argv) { return ssbench::run_cli(argc, argv); }
