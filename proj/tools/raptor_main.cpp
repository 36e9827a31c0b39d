#include "raptor/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return raptor::cli::run(argc, argv, std::cout, std::cerr); }
