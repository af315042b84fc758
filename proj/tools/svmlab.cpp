#include <svmlab/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return svmlab::main_entry(argc, argv, std::cout, std::cerr); }
