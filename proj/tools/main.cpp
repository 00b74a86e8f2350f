#include <iostream>

#include "apgdiag/cli.hpp"

int main(int argc, char** argv) { return apgdiag::cli::run(argc, argv, std::cout, std::cerr); }
