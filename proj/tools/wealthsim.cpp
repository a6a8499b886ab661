#include <iostream>

#include "wealth/commands.hpp"

int main(int argc, char** argv) { return wealth::run_cli(argc, argv, std::cout, std::cerr); }
