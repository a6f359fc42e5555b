#include <iostream>
#include <string>
#include <vector>

#include "bellaudit/cli.hpp"

int main(int argc, char** argv) {
  return bellaudit::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
