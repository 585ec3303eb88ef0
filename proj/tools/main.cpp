#include "twoscale/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return twoscale::cli_main(argc, argv, std::cout, std::cerr); }
