#include <iostream>

#include "macdec/cli.hpp"

int main(int argc, char** argv) { return macdec::run_cli(argc, argv, std::cout, std::cerr); }
