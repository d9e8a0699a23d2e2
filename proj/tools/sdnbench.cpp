#include <iostream>

#include "sdnbench/cli.hpp"

int main(int argc, char** argv) {
  return sdnbench::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
