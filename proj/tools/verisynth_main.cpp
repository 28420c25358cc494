#include <iostream>
#include <string>
#include <vector>

#include "verisynth/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return verisynth::run_cli(args, std::cout, std::cerr);
}
