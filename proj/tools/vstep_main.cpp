#include <iostream>

#include "vstep/cli.hpp"

int main(int argc, char** argv) { return vstep::run_cli(argc, argv, std::cout, std::cerr); }
