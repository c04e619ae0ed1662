#include "eos/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return eos::cli::run(argc, argv, std::cout, std::cerr); }
