#include <iostream>

#include "netmech/cli.hpp"

int main(int argc, char** argv) {
  return netmech::run_cli(argc, argv, std::cout, std::cerr);
}
