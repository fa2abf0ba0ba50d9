#include <iostream>

#include "macpo/harness/cli.hpp"

int main(int argc, char** argv) { return macpo::cli::run(argc, argv, std::cout, std::cerr); }
