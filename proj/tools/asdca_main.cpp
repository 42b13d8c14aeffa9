#include <iostream>
#include <string>
#include <vector>

#include "asdca/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return asdca::cli::main(args, std::cout, std::cerr);
}
