#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return whiteout::cli::run(argc, argv, std::cout); }
