#include <iostream>

#include "oam/cli.hpp"

int main(int argc, char** argv) { return oam::cli::main(argc, argv, std::cout, std::cerr); }
