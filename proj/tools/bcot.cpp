#include <iostream>

#include "bcot/cli/commands.hpp"

int main(int argc, char** argv) { return bcot::cli::run(argc, argv, std::cout, std::cerr); }
