#include <iostream>

#include "chainforge/cli.hpp"

int main(int argc, char** argv) { return chainforge::cli::run(argc, argv, std::cout, std::cerr); }
