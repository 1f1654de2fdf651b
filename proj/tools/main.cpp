#include <iostream>

#include "volgs/cli.hpp"

int main(int argc, char** argv) { return volgs::run_cli(argc, argv, std::cout, std::cerr); }
