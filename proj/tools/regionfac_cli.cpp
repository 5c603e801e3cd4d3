#include <iostream>

#include "regionfac/cli.hpp"

int main(int argc, char** argv) { return regionfac::cli::run(argc, argv, std::cout, std::cerr); }
