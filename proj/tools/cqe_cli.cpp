#include <iostream>

#include "cqe/cli.hpp"

int main(int argc, char** argv) { return cqe::cli::run_main(argc, argv, std::cout, std::cerr); }
