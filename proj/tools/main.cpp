#include <iostream>

#include "wpinn/cli.hpp"

int main(int argc, char** argv) { return wpinn::run_cli(argc, argv, std::cout, std::cerr); }
