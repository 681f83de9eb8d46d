#include <iostream>

#include "obliq/cli.hpp"

int main(int argc, char** argv) { return obliq::cli::run(argc, argv, std::cout, std::cerr); }
