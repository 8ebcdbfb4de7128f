#include <iostream>
#include <string>
#include <vector>

#include "mrca/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return mrca::cli::run(args, std::cout, std::cerr);
}
