#include "msmrf/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return msmrf::run_cli(argc, argv, std::cout, std::cerr); }
