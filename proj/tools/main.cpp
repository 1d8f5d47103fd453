#include <iostream>

#include "nlshape/cli.hpp"

int main(int argc, char** argv) { return nlshape::cli::run(argc, argv, std::cout, std::cerr); }
