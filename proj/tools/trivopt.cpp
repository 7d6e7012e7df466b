#include <iostream>
#include <string>
#include <vector>

#include "trivopt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return trivopt::cli::main_entry(args, std::cerr);
}
