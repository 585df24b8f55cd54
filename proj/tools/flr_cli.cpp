#include <iostream>

#include "flr/cli.hpp"

int main(int argc, char** argv) { return flr::cli::main(argc, argv, std::cout, std::cerr); }
