#include <iostream>

#include "hct/cli/commands.hpp"

int main(int argc, char** argv) { return hct::cli::run(argc, argv, std::cout, std::cerr); }
