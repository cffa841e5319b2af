#include <iostream>

#include "onom/cli.hpp"

int main(int argc, char** argv) { return onom::run_cli(argc, argv, std::cout, std::cerr); }
