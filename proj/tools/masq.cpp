#include <iostream>
#include <string>
#include <vector>

#include "masq/cli.hpp"

int main(int argc, char** argv) {
  return masq::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
