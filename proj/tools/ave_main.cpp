#include <iostream>

#include "ave/commands.hpp"

int main(int argc, char** argv) { return ave::run_cli(argc, argv, std::cout, std::cerr); }
