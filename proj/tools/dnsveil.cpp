#include <iostream>

#include "dnsveil/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dnsveil::run_cli(args, std::cout, std::cerr);
}
