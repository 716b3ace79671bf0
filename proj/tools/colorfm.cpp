#include <iostream>

#include "colorfm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return colorfm::run_cli(args, std::cout, std::cerr);
}
