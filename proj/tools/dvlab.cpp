#include <iostream>

#include "dvlab/cli.hpp"

int main(int argc, char** argv) { return dvlab::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
