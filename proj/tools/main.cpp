#include "lassocv/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lassocv::run_cli(argc, argv, std::cout, std::cerr); }
