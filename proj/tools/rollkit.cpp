#include "rolling/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rolling::run_cli(argc, argv, std::cout, std::cerr); }
