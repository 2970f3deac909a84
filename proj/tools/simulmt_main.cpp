#include <iostream>

#include "simulmt/cli.hpp"

int main(int argc, char** argv) {
  return simulmt::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
