#include <iostream>

#include "relaxlab/cli.hpp"

int main(int argc, char** argv) { return relaxlab::cli::run(argc, argv, std::cout, std::cerr); }
