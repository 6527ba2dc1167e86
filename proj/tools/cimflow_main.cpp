#include <iostream>
#include <string>
#include <vector>

#include "cimflow/cli.hpp"

int main(int argc, char** argv) {
  return cimflow::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
