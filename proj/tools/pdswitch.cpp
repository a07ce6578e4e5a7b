#include <iostream>

#include "pdswitch/cli.hpp"

int main(int argc, char** argv) { return pdswitch::run_cli(argc, argv, std::cout, std::cerr); }
