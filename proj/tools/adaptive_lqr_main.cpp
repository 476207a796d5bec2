#include <iostream>
#include <string>
#include <vector>

#include "adaptive_lqr/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return adaptive_lqr::RunCli(args, std::cout, std::cerr);
}
