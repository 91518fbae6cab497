#include <iostream>
#include <string>
#include <vector>

#include "mbmf/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mbmf::cli::run(args, std::cout, std::cerr);
}
