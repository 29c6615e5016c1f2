#include "babenko/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return babenko::run_cli(argc, argv, std::cout, std::cerr); }
