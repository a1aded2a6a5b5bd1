#include <iostream>

#include "wslab/cli/commands.hpp"

int main(int argc, char** argv) { return wslab::cli::run(argc, argv, std::cout, std::cerr); }
