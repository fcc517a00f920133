#include <iostream>

#include "pdmpis/runner.hpp"

int main(int argc, char** argv) { return pdmpis::cli_main(argc, argv, std::cout, std::cerr); }
