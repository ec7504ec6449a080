#include <iostream>

#include "origins/cli.hpp"

int main(int argc, char** argv) { return origins::cli::run(argc, argv, std::cout, std::cerr); }
