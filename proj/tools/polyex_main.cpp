#include <iostream>

#include "polyex/cli.hpp"

int main(int argc, char** argv) { return polyex::cli::run(argc, argv, std::cout, std::cerr); }
