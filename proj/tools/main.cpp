#include <iostream>

#include "nmp/cli.hpp"

int main(int argc, char** argv) { return nmp::cli::run(argc, argv, std::cout, std::cerr); }
