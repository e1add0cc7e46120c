#include <iostream>
#include <string>
#include <vector>

#include "dnnbounds/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dnnbounds::run_cli(args, std::cout, std::cerr);
}
