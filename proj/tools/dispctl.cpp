#include <iostream>

#include "dispctl/cli.hpp"

int main(int argc, char** argv) { return dispctl::cli::main(argc, argv, std::cout, std::cerr); }
