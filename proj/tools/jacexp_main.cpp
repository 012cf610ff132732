#include <iostream>

#include "jacexp/cli.hpp"

int main(int argc, char** argv) { return jacexp::cli::run(argc, argv, std::cout, std::cerr); }
