#include <iostream>

#include "offtarget/cli.hpp"

int main(int argc, char** argv) { return offtarget::cli::run(argc, argv, std::cout, std::cerr); }
